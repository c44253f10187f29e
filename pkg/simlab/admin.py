from django.contrib import admin

from simlab.models import DesignResult, StudyRun


class DesignResultInline(admin.TabularInline):
    model = DesignResult
    extra = 0
    fields = ("position", "label", "br", "se", "revar", "cv", "coverage", "reps", "excluded", "flagged")
    readonly_fields = fields


@admin.register(StudyRun)
class StudyRunAdmin(admin.ModelAdmin):
    list_display = ("id", "seed", "population_size", "sample_size", "reps", "created_at")
    list_filter = ("population_size", "sample_size", "created_at")
    search_fields = ("seed",)
    inlines = [DesignResultInline]


@admin.register(DesignResult)
class DesignResultAdmin(admin.ModelAdmin):
    list_display = ("run", "position", "label", "br", "se", "revar", "coverage", "flagged")
    list_filter = ("flagged", "label")
    search_fields = ("label",)
