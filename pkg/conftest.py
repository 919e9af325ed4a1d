import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'ecan.settings')
django.setup()
