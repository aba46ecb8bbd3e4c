"""Layout-aware no-reference document image quality assessment, desk scale.

Subpackages mirror the stages of the workflow: ``corpus`` synthesizes a
rated document corpus, ``ingest`` loads and cleans it, ``model`` is the
quality network, ``train`` fits and evaluates it, and ``metrics`` holds
the correlation measures.  ``cli`` wires everything behind one entry
point (``dociq``).
"""

from . import corpus, ingest, metrics, model, train
from .seeding import child_seed, make_rng

__version__ = "0.1.0"
