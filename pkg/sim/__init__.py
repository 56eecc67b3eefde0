"""Seeded scenario engine, attack injectors, fixtures and the throughput bench."""
