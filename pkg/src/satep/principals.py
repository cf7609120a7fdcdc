"""Authenticated principals and role gates shared by all services."""

from __future__ import annotations

from dataclasses import dataclass

from satep.errors import NotAuthenticated, NotAuthorized

USER = "user"
ADMIN = "admin"


@dataclass(frozen=True)
class Principal:
    kind: str  # USER (keyed by AM) or ADMIN (keyed by IDadm)
    id: int


def require_authenticated(principal: Principal | None) -> Principal:
    if principal is None:
        raise NotAuthenticated("a valid session is required")
    return principal


def require_user(principal: Principal | None) -> Principal:
    principal = require_authenticated(principal)
    if principal.kind != USER:
        raise NotAuthorized("only registered users may do this")
    return principal


def require_admin(principal: Principal | None) -> Principal:
    principal = require_authenticated(principal)
    if principal.kind != ADMIN:
        raise NotAuthorized("administrator role required")
    return principal
