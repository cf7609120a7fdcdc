"""Password digests and generated recovery passwords.

Digests are self-describing (scheme$iterations$salt$hash) so verification
never depends on current hasher settings.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import string

from satep.core.types import Credential

_SCHEME = "pbkdf2_sha256"

GENERATED_LENGTH = 12
_CLASSES = (string.ascii_lowercase, string.ascii_uppercase, string.digits)


class PasswordHasher:
    def __init__(self, iterations: int = 60_000):
        self.iterations = iterations

    def hash(self, password: str) -> Credential:
        salt = secrets.token_bytes(16)
        digest = hashlib.pbkdf2_hmac("sha256", password.encode(), salt, self.iterations)
        text = f"{_SCHEME}${self.iterations}${salt.hex()}${digest.hex()}"
        return Credential(password_digest=text, salt=salt)

    def verify(self, password: str, stored: str) -> bool:
        try:
            scheme, iterations, salt_hex, digest_hex = stored.split("$")
            if scheme != _SCHEME:
                return False
            expected = bytes.fromhex(digest_hex)
            actual = hashlib.pbkdf2_hmac(
                "sha256", password.encode(), bytes.fromhex(salt_hex), int(iterations)
            )
        except (ValueError, TypeError):
            return False
        return hmac.compare_digest(expected, actual)


def generate_password(rng, length: int = GENERATED_LENGTH) -> str:
    """Random password containing at least one of each character class."""
    alphabet = "".join(_CLASSES)
    while True:
        candidate = "".join(rng.choice(alphabet) for _ in range(length))
        if all(any(c in cls for c in candidate) for cls in _CLASSES):
            return candidate
