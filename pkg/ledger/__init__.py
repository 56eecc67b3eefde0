"""Simulated append-only, hash-chained block ledger."""
