"""example URL Configuration

admin first, the classifieds fixture site answers every other path.
"""
from django.conf import settings
from django.contrib import admin
from django.urls import path, include

ADMIN_PATH = getattr(settings, 'ADMIN_PATH', 'admin')

urlpatterns = [
    path(f'{ADMIN_PATH}/', admin.site.urls),
]

if 'classifieds' in settings.INSTALLED_APPS:
    urlpatterns += path('',
                        include(('classifieds.urls', 'classifieds'),
                                namespace='classifieds'),
                        name='classifieds'),
