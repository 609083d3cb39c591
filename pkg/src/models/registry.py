"""Registry of built-in coefficient and innovation models."""

from typing import Any, Callable, Dict, List, Mapping, Optional

from src.models.coefficients import (
    CoefficientModel,
    constant_model,
    ou_model,
    smooth_model,
    unit_model,
    zero_drift_model,
)
from src.models.innovations import GaussianInnovation, InnovationModel, MixtureInnovation
from src.utils.errors import ModelError

COEFFICIENT_FACTORIES: Dict[str, Callable[..., CoefficientModel]] = {
    "unit": unit_model,
    "zero-drift": zero_drift_model,
    "constant": constant_model,
    "smooth": smooth_model,
    "ou": ou_model,
}

COEFFICIENT_PARAMS: Dict[str, tuple] = {
    "unit": (),
    "zero-drift": (),
    "constant": ("drift", "sigma"),
    "smooth": ("a", "b"),
    "ou": ("theta", "sigma"),
}

INNOVATION_PARAMS: Dict[str, tuple] = {
    "gaussian": ("mean",),
    "mixture": ("mu3", "noise_fraction", "mu4"),
}


class ModelRegistry:
    """Builds models from their declarative ``kind`` + ``params`` form."""

    def get_coefficient_model(
        self, kind: str, params: Optional[Mapping[str, Any]] = None
    ) -> CoefficientModel:
        """Build a coefficient model.

        Args:
            kind: Model kind (e.g. "unit", "smooth")
            params: Keyword parameters of the model factory

        Returns:
            The coefficient model

        Raises:
            ModelError: If the kind or a parameter is not supported
        """
        if kind not in COEFFICIENT_FACTORIES:
            raise ModelError(f"Coefficient model {kind} is not supported")
        params = dict(params or {})
        self._reject_unknown(kind, params, COEFFICIENT_PARAMS[kind])
        return COEFFICIENT_FACTORIES[kind](**params)

    def get_innovation_model(
        self,
        kind: str,
        params: Optional[Mapping[str, Any]] = None,
        coeff: Optional[CoefficientModel] = None,
    ) -> InnovationModel:
        """Build an innovation model scaled by ``coeff.sigma``.

        Args:
            kind: Innovation kind ("gaussian" or "mixture")
            params: Family parameters
            coeff: Coefficient model whose sigma scales the innovations

        Returns:
            The innovation model

        Raises:
            ModelError: If the kind or a parameter is not supported
        """
        if kind not in INNOVATION_PARAMS:
            raise ModelError(f"Innovation model {kind} is not supported")
        params = dict(params or {})
        self._reject_unknown(kind, params, INNOVATION_PARAMS[kind])
        scale = coeff.sigma if coeff is not None else None
        if kind == "gaussian":
            return GaussianInnovation(scale=scale, mean=params.get("mean", 0.0))
        return MixtureInnovation.from_moments(
            mu3=params.get("mu3", 0.5),
            noise_fraction=params.get("noise_fraction", 0.5),
            mu4=params.get("mu4"),
            scale=scale,
        )

    def get_supported_coefficient_models(self) -> List[str]:
        return list(COEFFICIENT_FACTORIES.keys())

    def get_supported_innovation_models(self) -> List[str]:
        return list(INNOVATION_PARAMS.keys())

    def is_supported(self, kind: str) -> bool:
        """Check whether ``kind`` names any built-in model."""
        return kind in COEFFICIENT_FACTORIES or kind in INNOVATION_PARAMS

    @staticmethod
    def _reject_unknown(kind: str, params: Mapping[str, Any], allowed: tuple) -> None:
        unknown = sorted(set(params) - set(allowed))
        if unknown:
            raise ModelError(f"Unknown parameters for {kind}: {', '.join(unknown)}")
