import logging
import sys

import numpy as np

LOG_FORMAT = '%(asctime)s %(levelname)-7s %(name)s: %(message)s'

# Named streams so that adding an attack never shifts the honest traffic
RNG_STREAMS = ('users', 'ratings', 'queries', 'selection')


def configure_logging(level='INFO'):
    """Installs one stream handler on the root logger; safe to call twice."""
    root = logging.getLogger()
    root.setLevel(level)
    ours = [h for h in root.handlers if getattr(h, '_trustledger', False)]
    if ours:
        # stderr may have been swapped since the first call
        ours[0].setStream(sys.stderr)
        return root
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._trustledger = True
    root.addHandler(handler)
    return root


def make_rng(seed, stream=None):
    """
    Seeded numpy Generator. With a stream name the generator is spawned from
    the seed's SeedSequence at that stream's fixed position.
    """
    if stream is None:
        return np.random.default_rng(seed)
    children = np.random.SeedSequence(seed).spawn(len(RNG_STREAMS))
    return np.random.default_rng(children[RNG_STREAMS.index(stream)])
