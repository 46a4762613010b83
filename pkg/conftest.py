import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'credalkit.settings')
django.setup()
