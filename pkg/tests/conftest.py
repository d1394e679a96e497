import django

from severity_lab.conf import configure

configure()
django.setup()
