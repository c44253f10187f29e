# Generated by Django 5.1.8 on 2026-10-18 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="StudyRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("seed", models.BigIntegerField()),
                ("population_size", models.PositiveIntegerField(verbose_name="N")),
                ("sample_size", models.PositiveIntegerField(verbose_name="n")),
                ("reps", models.PositiveIntegerField()),
                ("rho", models.FloatField(verbose_name="AR coefficient")),
                (
                    "noise_sd",
                    models.FloatField(verbose_name="Noise standard deviation"),
                ),
                (
                    "ci_level",
                    models.FloatField(default=0.95, verbose_name="Confidence level"),
                ),
                ("population_mean", models.FloatField()),
                ("config", models.JSONField()),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "ordering": ["-created_at"],
            },
        ),
        migrations.CreateModel(
            name="DesignResult",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("position", models.PositiveIntegerField()),
                ("label", models.CharField(max_length=100)),
                ("spec", models.JSONField()),
                ("br", models.FloatField(null=True, verbose_name="BR")),
                ("se", models.FloatField(null=True, verbose_name="SE")),
                ("revar", models.FloatField(null=True, verbose_name="REVAR")),
                ("cv", models.FloatField(null=True, verbose_name="CV")),
                ("coverage", models.FloatField(null=True)),
                ("reps", models.PositiveIntegerField()),
                ("excluded", models.PositiveIntegerField(default=0)),
                ("flagged", models.BooleanField(default=False)),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="results",
                        to="simlab.studyrun",
                    ),
                ),
            ],
            options={
                "ordering": ["run", "position"],
                "unique_together": {("run", "position")},
            },
        ),
    ]
