"""Exact reverse-mode gradients of the discrete networks.

The only nontrivial piece is differentiating through the rotation step
x' = R(omega) x with R the Rodrigues exponential.  Writing t = ||omega||,
W = skew(omega) and R = I + s(t) W + c(t) W^2 with s = sin(t)/t and
c = (1 - cos(t))/t^2, the partial with respect to coordinate omega_k is

    dR/domega_k = omega_k u(t) W + s(t) E_k
                + omega_k v(t) W^2 + c(t) (E_k W + W E_k),

where E_k = skew(e_k), u = s'/t and v = c'/t.  Near t = 0 the closed
forms of u and v cancel catastrophically, so they get the same kind of
series branch (and the same threshold) as the forward coefficients:

    u(t) = (t cos t - sin t)/t^3   = -1/3 + t^2/30 - t^4/840 + t^6/45360 ...
    v(t) = (t sin t - 2(1-cos t))/t^4 = -1/12 + t^2/180 - t^4/6720 ...

Pairing dR/domega_k with an output cotangent G = dL/dR under the
Frobenius inner product collapses to cheap contractions because pairing
any matrix with E_k just reads off its antisymmetric part; everything
below is batched over samples.

Gradients are of the discrete maps themselves, exact to floating point;
the finite-difference checker at the bottom is the independent oracle.
"""

import numpy as np

from . import manifolds, network
from .errors import InvalidConfig
from .linalg import SMALL_ANGLE, _sinc_coeffs, skew_from_axial


def _sens_coeffs(theta):
    """u = s'(t)/t and v = c'(t)/t with the small-angle series branch."""
    theta = np.asarray(theta, dtype=float)
    u = np.empty_like(theta)
    v = np.empty_like(theta)
    small = theta < SMALL_ANGLE
    t2 = theta[small] ** 2
    u[small] = -1.0 / 3.0 + t2 * (1.0 / 30.0 + t2 * (-1.0 / 840.0 + t2 / 45360.0))
    v[small] = -1.0 / 12.0 + t2 * (1.0 / 180.0 + t2 * (-1.0 / 6720.0 + t2 / 453600.0))
    big = ~small
    tb = theta[big]
    st, ct = np.sin(tb), np.cos(tb)
    u[big] = (tb * ct - st) / tb ** 3
    v[big] = (tb * st - 2.0 * (1.0 - ct)) / tb ** 4
    return u, v


def _axis_pairing(g):
    """<G, E_k>_F for the three axis skews E_k, stacked on the last axis."""
    return np.stack([
        g[..., 2, 1] - g[..., 1, 2],
        g[..., 0, 2] - g[..., 2, 0],
        g[..., 1, 0] - g[..., 0, 1],
    ], axis=-1)


def rotation_cotangent(g, omega):
    """omega-cotangent of omega -> R(omega), given G = dL/dR.  Batched.

    Contracts G against dR/domega_k for each k:
      <G, E_k> is the axis pairing of G itself,
      <G, E_k W + W E_k> is the axis pairing of G W^T + W^T G,
    and the W and W^2 terms contribute scalars times omega.
    """
    theta = np.linalg.norm(omega, axis=-1)
    s, c = _sinc_coeffs(theta)
    u, v = _sens_coeffs(theta)
    w = skew_from_axial(omega)
    wt = np.swapaxes(w, -1, -2)
    gw = np.sum(g * w, axis=(-2, -1))
    gw2 = np.sum(g * (w @ w), axis=(-2, -1))
    radial = (u * gw + v * gw2)[..., None] * omega
    return radial + s[..., None] * _axis_pairing(g) \
        + c[..., None] * _axis_pairing(g @ wt + wt @ g)


def manifold_layer_vjp(x_in, preact, gate, omega, params, cfg, upstream):
    """Backward step for one geometric layer.

    Takes the trace entries recorded by the forward pass (input state,
    pre-activations, gates, rotation coordinates) plus the cotangent of
    the layer output, and returns the cotangent of the layer input along
    with the parameter gradient.  The input cotangent accounts both for
    the rotation acting on x and for the rotation's own dependence on x
    through the gates.  Parameter gradients are summed over the batch.
    """
    item_ndim = 1 if cfg.space == manifolds.SPHERE2 else 2
    x, single = network._as_batch(x_in, item_ndim)
    vout = network._as_batch(upstream, item_ndim)[0]
    preact, gate, omega = (np.atleast_2d(a) for a in (preact, gate, omega))
    rot = network.expm_skew3(omega)
    if cfg.space == manifolds.SPHERE2:
        g = vout[..., :, None] * x[..., None, :]
        x_cot = np.einsum("pij,pi->pj", rot, vout)
    else:
        g = vout @ np.swapaxes(x, -1, -2)
        x_cot = np.swapaxes(rot, -1, -2) @ vout
    omega_cot = rotation_cotangent(g, omega)
    f_cot = cfg.dt * (omega_cot @ cfg.generators.axials.T)
    gain_grad = np.sum(gate * f_cot, axis=0)
    z_cot = params.gains * gate * (1.0 - gate) * f_cot
    bias_grad = np.sum(z_cot, axis=0)
    if cfg.space == manifolds.SPHERE2:
        weight_grad = z_cot.T @ x
        x_cot = x_cot + z_cot @ params.weights
    else:
        weight_grad = np.einsum("pm,pij->mij", z_cot, x)
        x_cot = x_cot + np.einsum("pm,mij->pij", z_cot, params.weights)
    grad = network.ManifoldLayerParams(gain_grad, weight_grad, bias_grad)
    return (x_cot[0] if single else x_cot), grad


def classical_layer_vjp(x_in, params, dt, upstream):
    """Backward step for one residual block; closed-form chain rule."""
    x, single = network._as_batch(x_in, 1)
    vout = network._as_batch(upstream, 1)[0]
    pre = x @ params.w_in.T + params.bias
    s = network.sigmoid(pre)
    w_out_grad = dt * (vout.T @ s)
    t = (vout @ params.w_out) * (s * (1.0 - s))
    w_in_grad = dt * (t.T @ x)
    bias_grad = dt * np.sum(t, axis=0)
    x_cot = vout + dt * (t @ params.w_in)
    grad = network.ClassicalLayerParams(w_out_grad, w_in_grad, bias_grad)
    return (x_cot[0] if single else x_cot), grad


def _batch(inputs, targets, cfg):
    item_ndim = 2 if (cfg.model == network.MANIFOLD
                      and cfg.space == manifolds.SO3) else 1
    x, _ = network._as_batch(inputs, item_ndim)
    y, _ = network._as_batch(targets, item_ndim)
    if x.shape != y.shape:
        raise InvalidConfig("inputs and targets must have matching shapes")
    return x, y


def regularizer_norm(params):
    """Sum of squares of every stored scalar, all layers together."""
    if not params:
        return 0.0
    return float(np.sum(network.flatten_params(params) ** 2))


def network_loss(inputs, targets, params, cfg, lam):
    """Objective value: mean squared deviation plus (lam dt / 2) ||Theta||^2."""
    x, y = _batch(inputs, targets, cfg)
    out, _ = network.network_forward(x, params, cfg)
    r = (out - y).reshape(x.shape[0], -1)
    data = float(np.sum(r * r)) / x.shape[0]
    return data + 0.5 * lam * cfg.dt * regularizer_norm(params)


def backward_from_trace(trace, params, upstream, lam):
    """Backward sweep over a recorded forward pass.

    upstream is the cotangent of the final state (already including any
    batch-averaging factors); the result is the per-layer parameter
    gradient of data term plus lam * dt * theta from the Tikhonov term.
    """
    cfg = trace.config
    grads = [None] * cfg.layers
    for n in reversed(range(cfg.layers)):
        if cfg.model == network.MANIFOLD:
            upstream, g = manifold_layer_vjp(
                trace.states[n], trace.preacts[n], trace.gates[n],
                trace.axials[n], params[n], cfg, upstream)
            g.gains += lam * cfg.dt * params[n].gains
            g.weights += lam * cfg.dt * params[n].weights
            g.biases += lam * cfg.dt * params[n].biases
        else:
            upstream, g = classical_layer_vjp(
                trace.states[n], params[n], cfg.dt, upstream)
            g.w_out += lam * cfg.dt * params[n].w_out
            g.w_in += lam * cfg.dt * params[n].w_in
            g.bias += lam * cfg.dt * params[n].bias
        grads[n] = g
    return grads


def network_gradient(inputs, targets, params, cfg, lam):
    """Loss and its exact gradient for a batch, as (loss, per-layer grads).

    The data term is (1/P) sum_j ||out_j - y_j||^2, so the output
    cotangent seeding the backward sweep is (2/P) (out - y).
    """
    x, y = _batch(inputs, targets, cfg)
    p = x.shape[0]
    out, trace = network.network_forward(x, params, cfg)
    r = out - y
    data = float(np.sum(r * r)) / p
    grads = backward_from_trace(trace, params, (2.0 / p) * r, lam)
    loss = data + 0.5 * lam * cfg.dt * regularizer_norm(params)
    return loss, grads


def central_difference(fn, vec, step):
    """Central-difference gradient of a scalar function of a flat vector."""
    vec = np.asarray(vec, dtype=float)
    out = np.empty_like(vec)
    for i in range(vec.size):
        bump = np.zeros_like(vec)
        bump[i] = step
        out[i] = (fn(vec + bump) - fn(vec - bump)) / (2.0 * step)
    return out


def finite_diff_check(params, cfg, inputs, targets, lam, step=3e-5):
    """Worst relative disagreement between exact and numerical gradients.

    Central differences per scalar parameter; the relative error uses
    max(|exact|, |numerical|, 1e-10) in the denominator so that zero
    gradients do not blow up the ratio.

    The default step balances truncation against cancellation for this
    objective, whose magnitude is O(10): the difference f(x+h) - f(x-h)
    carries absolute noise around eps * |f| / h, so h = 1e-6 would bury
    small gradient coordinates in rounding error (measured, not a
    gradient defect); 3e-5 keeps both error sources near 1e-10.
    """
    if not 1e-8 <= step <= 1e-3:
        raise InvalidConfig("finite-difference step must lie in [1e-8, 1e-3]")
    _, grads = network_gradient(inputs, targets, params, cfg, lam)
    exact = network.flatten_params(grads)

    def value(vec):
        return network_loss(inputs, targets, network.unflatten_params(vec, cfg),
                            cfg, lam)

    numeric = central_difference(value, network.flatten_params(params), step)
    denom = np.maximum(np.maximum(np.abs(exact), np.abs(numeric)), 1e-10)
    return float(np.max(np.abs(exact - numeric) / denom))
