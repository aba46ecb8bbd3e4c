"""Central finite-difference verification of the analytic gradients.

The loss is a fixed random linear functional of the network outputs, so
its exact output-gradient is the coefficient tensor and every parameter
gradient exercises the full backward pass.  For each sampled parameter
coordinate the checker perturbs by +-h and compares the central
difference against backprop.

Two measurement caveats are handled explicitly rather than hidden:

* ReLU kinks: when a perturbation flips any activation sign, the loss is
  not differentiable on the interval and the central difference estimates
  nothing; such coordinates are reported as ``skipped`` and replaced by
  fresh samples.  Their fraction is tracked so a systematic problem
  cannot hide behind skips.
* Relative error on a near-zero gradient amplifies float64 roundoff of
  the loss itself; the comparison therefore uses ``|num - ana| /
  max(|num|, |ana|, noise_floor)`` where the floor is the roundoff bound
  ``64 * eps * |loss| / (2h)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import DocQualityNetwork
from .nn import ReLU


@dataclass
class GradCheckReport:
    checked: int
    skipped_kinks: int
    max_rel_error: float
    worst_name: str
    per_group_checked: dict[str, int]

    @property
    def skip_fraction(self) -> float:
        total = self.checked + self.skipped_kinks
        return self.skipped_kinks / total if total else 0.0


def _relu_signature(net: DocQualityNetwork) -> np.ndarray:
    parts = [
        m._mask.ravel()
        for _, m in net.named_modules()
        if isinstance(m, ReLU) and m._mask is not None
    ]
    return np.concatenate(parts)


def _component_group(name: str) -> str:
    return name.split(".", 1)[0]


def check_gradients(
    net: DocQualityNetwork,
    image: np.ndarray,
    mask: np.ndarray | None,
    n_samples: int = 1000,
    h: float = 1e-5,
    seed: int = 0,
    min_per_group: dict[str, int] | None = None,
) -> GradCheckReport:
    rng = np.random.default_rng(seed)
    coeff = rng.normal(size=(image.shape[0], net.config.dimensions, net.config.rater_outputs))

    def loss() -> float:
        return float((net.forward(image, mask, train=False) * coeff).sum())

    base_loss = loss()
    net.forward(image, mask, train=True)
    net.zero_grads()
    net.backward(coeff)

    params = list(net.named_parameters())
    sizes = np.array([p.value.size for _, p in params])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    total = int(offsets[-1])

    groups: dict[str, list[int]] = {}
    for idx, (name, _) in enumerate(params):
        groups.setdefault(_component_group(name), []).append(idx)

    # sample coordinates: quota per requested group, remainder uniform over all
    candidates: list[int] = []
    if min_per_group:
        for group, quota in min_per_group.items():
            group_coords = np.concatenate(
                [np.arange(offsets[i], offsets[i + 1]) for i in groups[group]]
            )
            take = min(quota, group_coords.size)
            candidates.extend(rng.choice(group_coords, size=take, replace=False).tolist())
    remainder = max(0, n_samples - len(candidates))
    candidates.extend(rng.choice(total, size=remainder, replace=False).tolist())
    # spares cover coordinates skipped at kinks
    spares = rng.choice(total, size=max(200, n_samples // 2), replace=False).tolist()

    noise_floor = 64.0 * np.finfo(np.float64).eps * max(abs(base_loss), 1.0) / (2.0 * h)

    checked = 0
    skipped = 0
    max_rel = 0.0
    worst = ""
    per_group: dict[str, int] = {}
    for qi, coord in enumerate(candidates + spares):
        if qi >= len(candidates) and checked >= n_samples:
            break  # spares only top up what kink skips removed
        p_idx = int(np.searchsorted(offsets, coord, side="right") - 1)
        name, param = params[p_idx]
        local = coord - offsets[p_idx]
        flat = param.value.ravel()
        orig = flat[local]

        flat[local] = orig + h
        loss_plus = loss()
        sig_plus = _relu_signature(net)
        flat[local] = orig - h
        loss_minus = loss()
        sig_minus = _relu_signature(net)
        flat[local] = orig

        if not np.array_equal(sig_plus, sig_minus):
            skipped += 1
            continue
        numeric = (loss_plus - loss_minus) / (2.0 * h)
        analytic = float(param.grad.ravel()[local])
        rel = abs(numeric - analytic) / max(abs(numeric), abs(analytic), noise_floor)
        checked += 1
        per_group[_component_group(name)] = per_group.get(_component_group(name), 0) + 1
        if rel > max_rel:
            max_rel = rel
            worst = f"{name}[{local}] num={numeric:.6g} ana={analytic:.6g}"

    return GradCheckReport(
        checked=checked,
        skipped_kinks=skipped,
        max_rel_error=max_rel,
        worst_name=worst,
        per_group_checked=per_group,
    )
