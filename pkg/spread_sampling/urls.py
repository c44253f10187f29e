from django.contrib import admin
from django.urls import path

# The only web surface is the admin, used to browse stored simulation studies
# (see simlab.models). Everything else runs through the management commands.

urlpatterns = [
    path("admin/", admin.site.urls),
]
