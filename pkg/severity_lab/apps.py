from django.apps import AppConfig


class SeverityLabConfig(AppConfig):
    name = "severity_lab"
    verbose_name = "Severity lab"
