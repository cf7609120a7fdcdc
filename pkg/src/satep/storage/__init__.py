"""Transactional persistence: sqlite facade, migrations, object store, ops."""

from satep.storage.db import Database, Transaction
from satep.storage.migrate import apply_migrations, default_migrations_dir
from satep.storage.objects import ObjectStore
from satep.storage.ops import (
    EMPTY_GROUP_ID,
    CascadeReport,
    Page,
    collect_objects,
    delete_lecture_cascade,
    integrity_sweep,
    load_group_question_ids,
    persist_test_groups,
    record_completed_test,
    search_records,
)

__all__ = [
    "EMPTY_GROUP_ID",
    "CascadeReport",
    "Database",
    "ObjectStore",
    "Page",
    "Transaction",
    "apply_migrations",
    "collect_objects",
    "default_migrations_dir",
    "delete_lecture_cascade",
    "integrity_sweep",
    "load_group_question_ids",
    "persist_test_groups",
    "record_completed_test",
    "search_records",
]
