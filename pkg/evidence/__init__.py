"""Evidence map, service projection and feedback traces built from ledger events."""
