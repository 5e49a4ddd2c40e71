"""Scikit-learn style front end for the private boosted halfspace learner."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import NormViolationError
from .halfspace import LabeledSample, LearnerParams, learn_halfspace
from .privacy import ApproxDpParams

__all__ = ["BoostedHalfspaceClassifier"]


class BoostedHalfspaceClassifier(BaseEstimator, ClassifierMixin):
    """Differentially private large-margin halfspace classifier.

    Boosts a noisy centering weak learner under smooth (lazy-Bregman)
    re-weighting; the fitted model is a single linear separator, exposed
    through the usual ``fit`` / ``predict`` / ``decision_function`` API so
    it composes with pipelines and model selection.

    Parameters
    ----------
    alpha : target classification error, in (0, 1).
    beta : failure probability of the PAC guarantee, in (0, 1).
    tau : assumed margin of the data, in (0, 1).
    sigma : optional noise-scale override; ``0`` disables privacy noise
        and makes fitting deterministic given ``random_state``.
    epsilon, delta : optional approximate-DP target; when ``epsilon`` is
        given (and ``sigma`` is not) the noise scale is calibrated so the
        composed budget meets ``(epsilon, delta)``.
    noise_constant : the unpinned constant in the schedule's noise formula.
    rounds : optional round-count override (defaults to the schedule).
    random_state : seed for the noise stream.

    Attributes
    ----------
    coef_ : the learned vector; the classifier is ``sign(coef_ . x)``.
    ledger_ : composed zCDP budget of the fit.
    classes_ : the two class labels seen in ``y``.

    Notes
    -----
    Rows of ``X`` must lie in the L2 unit ball (this learner's geometry);
    rescale beforehand, e.g. divide by the maximum row norm.
    """

    def __init__(
        self,
        alpha: float = 0.2,
        beta: float = 0.1,
        tau: float = 0.3,
        sigma: float | None = None,
        epsilon: float | None = None,
        delta: float = 1e-6,
        noise_constant: float = 1.0,
        rounds: int | None = None,
        random_state: int | None = None,
    ):
        self.alpha = alpha
        self.beta = beta
        self.tau = tau
        self.sigma = sigma
        self.epsilon = epsilon
        self.delta = delta
        self.noise_constant = noise_constant
        self.rounds = rounds
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        classes = np.unique(y)
        if classes.size != 2:
            raise ValueError(
                f"this is a binary classifier; got {classes.size} classes"
            )
        self.classes_ = classes
        signs = np.where(y == classes[1], 1.0, -1.0)
        norms = np.linalg.norm(X, axis=1)
        if norms.max() > 1.0 + 1e-9:
            raise NormViolationError(
                "rows of X must lie in the unit ball; rescale the features first"
            )
        sample = LabeledSample(X, signs)

        target = None
        if self.sigma is None and self.epsilon is not None:
            target = ApproxDpParams(float(self.epsilon), float(self.delta))
        params = LearnerParams(
            alpha=self.alpha,
            beta=self.beta,
            tau=self.tau,
            sigma_override=self.sigma,
            privacy_target=target,
            noise_constant=self.noise_constant,
            rounds_override=self.rounds,
        )
        seed = 0 if self.random_state is None else int(self.random_state)
        result = learn_halfspace(sample, params, seed)

        self.coef_ = result.hypothesis
        self.ledger_ = result.ledger
        self.boost_ = result.boost
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        return X @ self.coef_

    def predict(self, X):
        scores = self.decision_function(X)
        # sign(0) = +1, so ties deterministically take the larger class
        return np.where(scores >= 0.0, self.classes_[1], self.classes_[0])
