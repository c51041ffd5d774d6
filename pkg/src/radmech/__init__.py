"""Mechanistic radical reaction prediction from idealized molecular-orbital
interactions.

Subpackages and modules:

* ``chemgraph`` -- molecular graphs, SMILES parsing/writing, reaction records.
* ``orbchain``  -- orbital enumeration and single-step mechanism generation.
* ``featurize`` -- atom descriptors, reaction feature vectors, and the
  differential reaction fingerprint.
* ``neural``    -- a small dense-network training stack (classifier, Siamese
  ranker, contrastive pair scorer).
* ``dataset``   -- corpus loading, label derivation, negative sampling.
* ``predictor`` -- the two inference pipelines and the evaluation harness.
* ``pathway``   -- breadth-first mechanistic pathway search.
* ``service``   -- HTTP API and operator CLI.
"""

__version__ = "0.1.0"
