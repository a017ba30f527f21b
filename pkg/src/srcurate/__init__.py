"""Ground-truth curation toolkit for realistic image super-resolution.

Subpackages cover the full pipeline: image primitives (``imgcore``),
seeded degradation synthesis (``degrade``), patch group selection
(``patchsel``), the annotation campaign service (``campaign``,
``service``), label aggregation and dataset export (``aggregate``),
training-loss kernels (``losskernel``), quality metrics
(``evalmetrics``) and scripted campaign simulation (``simulate``).
"""

__version__ = "0.1.0"
