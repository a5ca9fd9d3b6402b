"""Structure-preserving residual networks on the sphere and the rotation group.

The geometric model advances its state by exponentials of tangent fields,
so every layer output sits on the manifold exactly; the classical ResNet
baseline, trained on the same flow-map data, drifts off.  The package
provides the two forward models, exact reverse-mode gradients, the
ground-truth data generators, a trainer, and the benchmark sweep.
"""

__version__ = "0.1.0"

from . import data, grad, lie, linalg, manifolds, network, sweep, train  # noqa: F401
