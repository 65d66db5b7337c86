from django.contrib import admin

from . models import ToolBuild
from . utils import html_json_preview


@admin.register(ToolBuild)
class ToolBuildAdmin(admin.ModelAdmin):
    search_fields = ('candidate_name', )
    list_display = ('candidate_name', 'status', 'attempts', 'step_count',
                    'promoted', 'created')
    list_filter = ('status', 'promoted', 'created')
    readonly_fields = ('candidate_name',
                       'status',
                       'attempts',
                       'version',
                       'fail_rate',
                       'step_count',
                       'agentic_ratio',
                       'promoted',
                       'report_preview',
                       'created',
                       'modified')
    exclude = ('report', )
    fieldsets = (
        (None,
            {
                'fields': (
                    'candidate_name',
                    'status',
                    'version',
                )
            }
         ),
        ('Metrics',
            {
                'fields': (
                    'attempts',
                    'fail_rate',
                    'step_count',
                    'agentic_ratio',
                    'promoted',
                    'created',
                    'modified',
                )
            }
         ),
        ('Build report',
            {
                'fields': ('report_preview',),
                'classes': ('collapse',),
            }
         )
    )

    def report_preview(self, obj):
        return html_json_preview(obj.report)
    report_preview.short_description = 'build report'
