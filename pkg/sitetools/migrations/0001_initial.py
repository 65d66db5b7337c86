from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ToolBuild',
            fields=[
                ('id', models.AutoField(auto_created=True,
                                        primary_key=True, serialize=False, verbose_name='ID')),
                ('candidate_name', models.CharField(max_length=255)),
                ('status', models.CharField(choices=[(
                    'validated', 'validated'), ('failed', 'failed')], max_length=32)),
                ('attempts', models.PositiveIntegerField(default=0)),
                ('version', models.PositiveIntegerField(blank=True, null=True)),
                ('fail_rate', models.FloatField(blank=True, null=True)),
                ('step_count', models.PositiveIntegerField(blank=True, null=True)),
                ('agentic_ratio', models.FloatField(blank=True, null=True)),
                ('promoted', models.BooleanField(default=False)),
                ('report', models.TextField(blank=True, null=True)),
                ('created', models.DateTimeField(auto_now_add=True)),
                ('modified', models.DateTimeField(auto_now=True)),
            ],
            options={
                'ordering': ('-created',),
            },
        ),
    ]
