from django.apps import AppConfig


class TunnelConfig(AppConfig):
    name = 'tunnel'
    verbose_name = 'Ellipsoid tunnel planner'

    def ready(self):
        import tunnel.signals  # noqa: F401
