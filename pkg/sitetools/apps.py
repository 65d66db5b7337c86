from django.apps import AppConfig


class SitetoolsConfig(AppConfig):
    name = 'sitetools'
    default_auto_field = 'django.db.models.AutoField'
