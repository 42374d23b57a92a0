from .seeding import Stream, derive_seed, rng_for
__all__ = ['Stream', 'derive_seed', 'rng_for']
