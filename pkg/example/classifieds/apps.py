from django.apps import AppConfig


class ClassifiedsConfig(AppConfig):
    name = 'classifieds'
    verbose_name = 'Classifieds fixture site'
