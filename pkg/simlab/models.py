from django.db import models


class StudyRun(models.Model):
    """
    One stored simulation study.

    Fields:
    - seed: Root seed of every random stream of the study.
    - population_size, sample_size: N and n of the study.
    - reps: Replicates per design.
    - rho, noise_sd: Parameters of the autocorrelated noise.
    - ci_level: Level of the confidence intervals.
    - population_mean: Mean of the generated population.
    - config: The full study configuration, design specs included.
    - created_at: Timestamp when the run was stored (auto-managed).
    """

    seed = models.BigIntegerField()
    population_size = models.PositiveIntegerField("N")
    sample_size = models.PositiveIntegerField("n")
    reps = models.PositiveIntegerField()
    rho = models.FloatField("AR coefficient")
    noise_sd = models.FloatField("Noise standard deviation")
    ci_level = models.FloatField("Confidence level", default=0.95)
    population_mean = models.FloatField()
    config = models.JSONField()
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ["-created_at"]

    def __str__(self):
        return f"study seed={self.seed} N={self.population_size} reps={self.reps}"


class DesignResult(models.Model):
    """
    Summary of one design within a StudyRun.

    Metrics are stored as NULL when they are undefined (no usable replicate).
    ``flagged`` marks designs with null joint inclusion probabilities.
    """

    run = models.ForeignKey(StudyRun, on_delete=models.CASCADE, related_name="results")
    position = models.PositiveIntegerField()
    label = models.CharField(max_length=100)
    spec = models.JSONField()
    br = models.FloatField("BR", null=True)
    se = models.FloatField("SE", null=True)
    revar = models.FloatField("REVAR", null=True)
    cv = models.FloatField("CV", null=True)
    coverage = models.FloatField(null=True)
    reps = models.PositiveIntegerField()
    excluded = models.PositiveIntegerField(default=0)
    flagged = models.BooleanField(default=False)

    class Meta:
        ordering = ["run", "position"]
        unique_together = ("run", "position")

    def __str__(self):
        return f"{self.label} (run {self.run_id})"
