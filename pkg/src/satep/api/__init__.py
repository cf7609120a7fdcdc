"""HTTP/JSON boundary over the service layer."""

from satep.api.app import ERROR_STATUS, ROUTES, RouteSpec, create_app

__all__ = ["ERROR_STATUS", "ROUTES", "RouteSpec", "create_app"]
