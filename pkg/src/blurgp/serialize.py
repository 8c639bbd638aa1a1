"""Model files: a JSON document with exact-round-trip floats.

Floats are written with up to 17 significant digits, which is enough for
the parsed value to equal the original bit for bit.  Loading rebuilds
the full posterior state, including a fresh factorization of the basis
Gram matrix.
"""

import json

import numpy as np

from .data import fmt
from .ep import EpConfig
from .exceptions import DataFormatError
from .kernels import BasisSet, BlurredBasis, RbfKernel, gram_khat
from .likelihoods import GaussianNoise, LabelNoise
from .posterior import PosteriorState

__all__ = [
    "dumps_document",
    "model_to_document",
    "document_to_model",
    "save_model",
    "load_model",
]

FORMAT_VERSION = 1


def _emit(value, indent):
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f'{pad}  "{key}": {_emit(child, indent + 1)}'
            for key, child in value.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{pad}  {_emit(child, indent + 1)}" for child in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise DataFormatError(f"cannot serialize value of type {type(value).__name__}")


def dumps_document(doc):
    """Serialize a document dict to JSON text with .17g floats."""
    return _emit(doc, 0) + "\n"


def _likelihood_to_doc(lik):
    if isinstance(lik, GaussianNoise):
        return {"type": "gaussian-noise", "v_y": lik.v_y}
    if isinstance(lik, LabelNoise):
        return {"type": "label-noise", "epsilon": lik.epsilon}
    raise DataFormatError(f"unsupported likelihood {type(lik).__name__}")


def _likelihood_from_doc(doc):
    kind = doc.get("type")
    if kind == "gaussian-noise":
        return GaussianNoise(v_y=float(doc["v_y"]))
    if kind == "label-noise":
        return LabelNoise(epsilon=float(doc["epsilon"]))
    raise DataFormatError(f"unknown likelihood type {kind!r}")


def model_to_document(state, lik, cfg, seed):
    """Flatten a fitted model into the plain-document form."""
    return {
        "version": FORMAT_VERSION,
        "kernel": {"sigma": state.kernel.sigma, "dim": state.kernel.dim},
        "basis": [
            {
                "center": [float(v) for v in b.center],
                "cov": [[float(v) for v in row] for row in b.cov],
                "precision": b.precision,
                "virtual_target": b.virtual_target,
            }
            for b in state.basis
        ],
        "alpha": [float(v) for v in state.alpha],
        "beta": [[float(v) for v in row] for row in state.beta],
        "likelihood": _likelihood_to_doc(lik),
        "ep_config": {
            "tol": cfg.tol,
            "max_sweeps": cfg.max_sweeps,
            "damping": cfg.damping,
            "shuffle": cfg.shuffle,
            "seed": cfg.seed,
            "min_cavity_var": cfg.min_cavity_var,
        },
        "seed": seed,
    }


def document_to_model(doc):
    """Rebuild (state, lik, cfg, seed) from a parsed document."""
    if doc.get("version") != FORMAT_VERSION:
        raise DataFormatError(
            f"unsupported model version {doc.get('version')!r}"
        )
    try:
        kernel = RbfKernel(
            sigma=float(doc["kernel"]["sigma"]), dim=int(doc["kernel"]["dim"])
        )
        bases = tuple(
            BlurredBasis(
                center=np.array(entry["center"], dtype=float),
                cov=np.array(entry["cov"], dtype=float),
                precision=float(entry["precision"]),
                virtual_target=float(entry["virtual_target"]),
            )
            for entry in doc["basis"]
        )
        basis = BasisSet(bases=bases)
        alpha = np.array(doc["alpha"], dtype=float)
        beta = np.array(doc["beta"], dtype=float)
        lik = _likelihood_from_doc(doc["likelihood"])
        cfg_doc = doc["ep_config"]
        cfg = EpConfig(
            tol=float(cfg_doc["tol"]),
            max_sweeps=int(cfg_doc["max_sweeps"]),
            damping=float(cfg_doc["damping"]),
            shuffle=bool(cfg_doc["shuffle"]),
            seed=int(cfg_doc["seed"]),
            min_cavity_var=float(cfg_doc["min_cavity_var"]),
        )
        seed = int(doc["seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed model document: {exc}") from exc
    state = PosteriorState(
        alpha=alpha,
        beta=beta,
        basis=basis,
        kernel=kernel,
        khat=gram_khat(kernel, basis),
    )
    return state, lik, cfg, seed


def save_model(path, state, lik, cfg, seed):
    """Write a fitted model to a JSON file."""
    with open(path, "w") as handle:
        handle.write(dumps_document(model_to_document(state, lik, cfg, seed)))


def load_model(path):
    """Read a model file back into (state, lik, cfg, seed)."""
    try:
        with open(path) as handle:
            doc = json.load(handle)
    except FileNotFoundError as exc:
        raise DataFormatError(f"no such model file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path} is not valid JSON: {exc}") from exc
    return document_to_model(doc)
