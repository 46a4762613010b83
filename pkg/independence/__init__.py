default_app_config = 'independence.apps.IndependenceConfig'
