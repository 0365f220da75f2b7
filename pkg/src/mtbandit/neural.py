"""Neural-feature LinUCB: a small MLP maps contexts to latent features,
and a LinUCB head runs on those features.

Selection and head updates are exactly LinUCB with x replaced by f(x; w).
The network itself is refreshed periodically by minibatch gradient descent
on the squared error between head predictions theta_a . f(x; w) and the
rewards stored in a replay buffer; after each refresh the head statistics
are rebuilt from the buffer under the new features.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .core import Policy, RngStream, as_context, check_arm, check_reward, register_policy
from .policies import SNAPSHOT_VERSION, LinUcbPolicy


def _act(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        return np.tanh(z)
    if kind == "identity":
        return z
    raise ValueError(f"unknown activation {kind!r}")


def _act_grad(activated: np.ndarray, kind: str) -> np.ndarray:
    # Gradients expressed via the activated value: d/dz tanh(z) = 1 - tanh(z)^2.
    if kind == "tanh":
        return 1.0 - activated**2
    if kind == "identity":
        return np.ones_like(activated)
    raise ValueError(f"unknown activation {kind!r}")


class MlpNetwork:
    """Feed-forward map R^dim -> R^out_dim with two hidden layers.

    Hidden layers use a smooth saturating nonlinearity (tanh); the output
    layer is linear. The "identity" activation plus identity weights turn
    the whole network into a pass-through, which the tests use to reduce
    the neural policy to plain LinUCB.
    """

    def __init__(
        self,
        dim: int,
        hidden: tuple[int, int] = (50, 50),
        out_dim: int = 50,
        activation: str = "tanh",
        init_rng: Optional[RngStream] = None,
    ):
        self.dim = int(dim)
        self.hidden = (int(hidden[0]), int(hidden[1]))
        self.out_dim = int(out_dim)
        self.activation = activation
        sizes = [self.dim, self.hidden[0], self.hidden[1], self.out_dim]
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            if init_rng is None:
                w = np.zeros((fan_in, fan_out))
            else:
                scale = np.sqrt(2.0 / (fan_in + fan_out))
                w = init_rng.normal(0.0, scale, size=(fan_in, fan_out))
            self.weights.append(np.asarray(w, dtype=np.float64))
            self.biases.append(np.zeros(fan_out, dtype=np.float64))

    @classmethod
    def identity(cls, dim: int) -> "MlpNetwork":
        """A network whose forward map is exactly x -> x."""
        net = cls(dim, hidden=(dim, dim), out_dim=dim, activation="identity")
        for i in range(3):
            net.weights[i] = np.eye(dim, dtype=np.float64)
        return net

    def forward(self, x: np.ndarray) -> np.ndarray:
        h = _act(x @ self.weights[0] + self.biases[0], self.activation)
        h = _act(h @ self.weights[1] + self.biases[1], self.activation)
        return h @ self.weights[2] + self.biases[2]

    def forward_batch(self, xs: np.ndarray) -> np.ndarray:
        return self.forward(np.asarray(xs, dtype=np.float64))

    def parameters(self) -> list[np.ndarray]:
        return self.weights + self.biases

    def loss_and_gradients(
        self, xs: np.ndarray, thetas: np.ndarray, rewards: np.ndarray
    ) -> tuple[float, list[np.ndarray]]:
        """Mean squared error of theta_i . f(x_i; w) against r_i, plus grads.

        thetas holds one head-coefficient vector per sample (the vector of
        the arm that sample pulled). Gradients are returned in the order
        of `parameters()`.
        """
        xs = np.asarray(xs, dtype=np.float64)
        thetas = np.asarray(thetas, dtype=np.float64)
        rewards = np.asarray(rewards, dtype=np.float64)
        n = xs.shape[0]

        a1 = _act(xs @ self.weights[0] + self.biases[0], self.activation)
        a2 = _act(a1 @ self.weights[1] + self.biases[1], self.activation)
        z = a2 @ self.weights[2] + self.biases[2]

        preds = np.sum(z * thetas, axis=1)
        err = preds - rewards
        loss = float(np.mean(err**2))

        # d loss / d z_i = (2/n) err_i * theta_i
        dz = (2.0 / n) * err[:, None] * thetas
        dw3 = a2.T @ dz
        db3 = dz.sum(axis=0)
        da2 = dz @ self.weights[2].T * _act_grad(a2, self.activation)
        dw2 = a1.T @ da2
        db2 = da2.sum(axis=0)
        da1 = da2 @ self.weights[1].T * _act_grad(a1, self.activation)
        dw1 = xs.T @ da1
        db1 = da1.sum(axis=0)
        return loss, [dw1, dw2, dw3, db1, db2, db3]

    def apply_gradients(self, grads: list[np.ndarray], learning_rate: float) -> None:
        for param, grad in zip(self.parameters(), grads):
            param -= learning_rate * grad

    def snapshot(self) -> dict:
        return {
            "dim": self.dim,
            "hidden": list(self.hidden),
            "out_dim": self.out_dim,
            "activation": self.activation,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> "MlpNetwork":
        net = cls(
            snap["dim"],
            hidden=tuple(snap["hidden"]),
            out_dim=snap["out_dim"],
            activation=snap["activation"],
        )
        net.weights = [np.asarray(w, dtype=np.float64) for w in snap["weights"]]
        net.biases = [np.asarray(b, dtype=np.float64) for b in snap["biases"]]
        return net


@register_policy
class NeuralLinUcbPolicy(Policy):
    """LinUCB over learned latent features.

    Schedule: every `train_batch` updates, run `epochs` epochs of minibatch
    gradient descent on the buffer, then rebuild the head from the buffer
    under the refreshed features. train_batch=0 disables training, which
    freezes the feature map at its initialization.
    """

    kind = "neural_linucb"
    is_contextual = True

    def __init__(
        self,
        n_arms: int,
        dim: int,
        alpha: float = 1.5,
        ridge: float = 1.0,
        latent_dim: int = 50,
        hidden: tuple[int, int] = (50, 50),
        learning_rate: float = 1e-3,
        train_batch: int = 32,
        epochs: int = 5,
        minibatch: int = 16,
        buffer_cap: int = 4096,
        seed: int = 0,
        network: Optional[MlpNetwork] = None,
    ):
        super().__init__(n_arms)
        self.dim = int(dim)
        self.learning_rate = float(learning_rate)
        self.train_batch = int(train_batch)
        self.epochs = int(epochs)
        self.minibatch = int(minibatch)
        self.buffer_cap = int(buffer_cap)
        self.seed = int(seed)
        self._train_rng = RngStream(self.seed)
        if network is None:
            network = MlpNetwork(dim, hidden=hidden, out_dim=latent_dim, init_rng=self._train_rng)
        elif network.dim != dim:
            raise ValueError(f"network input dim {network.dim} != context dim {dim}")
        self.network = network
        self.head = LinUcbPolicy(n_arms, self.network.out_dim, alpha=alpha, ridge=ridge)
        self.buffer: list[tuple[np.ndarray, int, float]] = []
        self.rounds = 0

    def select(self, rng: RngStream, context=None) -> int:
        if context is None:
            raise ValueError(f"{self.kind} is contextual; select/update need a context vector")
        x = as_context(context, self.dim)
        z = self.network.forward(x)
        return self.head.select(rng, z)

    def update(self, arm: int, reward: float, context=None) -> None:
        arm = check_arm(arm, self.n_arms)
        r = check_reward(reward)
        if context is None:
            raise ValueError(f"{self.kind} is contextual; select/update need a context vector")
        x = as_context(context, self.dim)
        self.buffer.append((x.copy(), arm, r))
        if len(self.buffer) > self.buffer_cap:
            self.buffer.pop(0)
        self.head.update(arm, r, self.network.forward(x))
        self.rounds += 1
        if self.train_batch > 0 and self.rounds % self.train_batch == 0:
            self._train()
            self._rebuild_head()

    def _train(self) -> None:
        xs = np.stack([x for x, _, _ in self.buffer])
        arms = np.array([a for _, a, _ in self.buffer])
        rewards = np.array([r for _, _, r in self.buffer])
        thetas = np.stack([self.head.theta[a] for a in arms])
        n = len(self.buffer)
        for _ in range(self.epochs):
            order = self._train_rng.shuffled(range(n))
            for start in range(0, n, self.minibatch):
                batch = order[start : start + self.minibatch]
                _, grads = self.network.loss_and_gradients(xs[batch], thetas[batch], rewards[batch])
                self.network.apply_gradients(grads, self.learning_rate)

    def _rebuild_head(self) -> None:
        # Only buffered samples are replayed; features of evicted rounds no
        # longer exist under the new weights.
        fresh = LinUcbPolicy(
            self.n_arms, self.network.out_dim, alpha=self.head.alpha, ridge=self.head.ridge
        )
        for x, arm, r in self.buffer:
            fresh.update(arm, r, self.network.forward(x))
        self.head = fresh

    def buffer_loss(self) -> float:
        """Current MSE of head predictions over the buffer (diagnostics)."""
        xs = np.stack([x for x, _, _ in self.buffer])
        arms = np.array([a for _, a, _ in self.buffer])
        rewards = np.array([r for _, _, r in self.buffer])
        thetas = np.stack([self.head.theta[a] for a in arms])
        loss, _ = self.network.loss_and_gradients(xs, thetas, rewards)
        return loss

    def snapshot(self) -> dict:
        return {
            "policy_kind": self.kind,
            "version": SNAPSHOT_VERSION,
            "state": {
                "n_arms": self.n_arms,
                "dim": self.dim,
                "learning_rate": self.learning_rate,
                "train_batch": self.train_batch,
                "epochs": self.epochs,
                "minibatch": self.minibatch,
                "buffer_cap": self.buffer_cap,
                "seed": self.seed,
                "rounds": self.rounds,
                "network": self.network.snapshot(),
                "head": self.head.snapshot(),
                "buffer": [[x.tolist(), a, r] for x, a, r in self.buffer],
                "train_rng_state": self._train_rng.get_state(),
            },
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> "NeuralLinUcbPolicy":
        s = snap["state"]
        network = MlpNetwork.from_snapshot(s["network"])
        head = LinUcbPolicy.from_snapshot(s["head"])
        policy = cls(
            s["n_arms"],
            s["dim"],
            alpha=head.alpha,
            ridge=head.ridge,
            learning_rate=s["learning_rate"],
            train_batch=s["train_batch"],
            epochs=s["epochs"],
            minibatch=s["minibatch"],
            buffer_cap=s["buffer_cap"],
            seed=s["seed"],
            network=network,
        )
        policy.head = head
        policy.rounds = int(s["rounds"])
        policy.buffer = [
            (np.asarray(x, dtype=np.float64), int(a), float(r)) for x, a, r in s["buffer"]
        ]
        policy._train_rng.set_state(s["train_rng_state"])
        return policy
