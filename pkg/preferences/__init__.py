default_app_config = 'preferences.apps.PreferencesConfig'
