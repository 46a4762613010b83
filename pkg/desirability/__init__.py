default_app_config = 'desirability.apps.DesirabilityConfig'
