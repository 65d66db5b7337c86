import json
import logging

from django.db import models


logger = logging.getLogger(__name__)


class ToolBuild(models.Model):
    """
        audit log of pipeline builds
    """
    STATUS = (('validated', 'validated'),
              ('failed', 'failed'))

    candidate_name = models.CharField(max_length=255)
    status = models.CharField(max_length=32, choices=STATUS)
    attempts = models.PositiveIntegerField(default=0)
    version = models.PositiveIntegerField(blank=True, null=True)
    fail_rate = models.FloatField(blank=True, null=True)
    step_count = models.PositiveIntegerField(blank=True, null=True)
    agentic_ratio = models.FloatField(blank=True, null=True)
    promoted = models.BooleanField(default=False)
    report = models.TextField(blank=True, null=True)

    created = models.DateTimeField(auto_now_add=True)
    modified = models.DateTimeField(auto_now=True)

    class Meta:
        ordering = ('-created', )

    def __str__(self):
        return f'{self.candidate_name} {self.status} ({self.attempts})'

    def get_report(self):
        return json.loads(self.report or '{}')

    @classmethod
    def from_result(cls, result, version=None):
        final = result.as_dict().get('final', {})
        return cls.objects.create(
            candidate_name=result.candidate,
            status=result.status,
            attempts=len(result.attempts),
            version=version,
            fail_rate=final.get('fail_rate'),
            step_count=final.get('step_count'),
            agentic_ratio=final.get('agentic_ratio'),
            promoted=final.get('promoted', False),
            report=json.dumps(result.as_dict(), sort_keys=True)
        )
