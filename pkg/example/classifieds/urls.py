from django.urls import path, re_path

from . import views


urlpatterns = [
    path('reasoner', views.reasoner, name='reasoner'),
    re_path(r'^(?P<path>.*)$', views.site, name='site'),
]
