"""Contact-side classification from windows of wrench samples.

A small Inception-style 1D convolutional network implemented directly on
numpy: two blocks of parallel convolutions with kernel widths {9, 19, 39},
global average pooling over time and a linear head. Global pooling makes the
forward pass accept any window length n >= 1, so the history-length sweep
needs no architecture changes. Training uses cross-entropy with the Adam
update rule; gradients are computed analytically (backprop by hand), which
also makes them checkable against finite differences.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .types import ContactSide, Wrench

WEIGHTS_VERSION = 1
SAMPLE_RATE = 29.0  # Hz, wrench sensor clock

KERNEL_WIDTHS = (9, 19, 39)
PATH_CHANNELS = 10  # per parallel convolution; block output = 3 * this


class EmptyWindowError(ValueError):
    pass


class ClassMissingError(ValueError):
    pass


class DurationTooLongError(ValueError):
    pass


@dataclass(frozen=True)
class WrenchWindow:
    """6 x n matrix of wrench samples, rows (fx, fy, fz, tx, ty, tz),
    columns oldest to newest."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        if d.ndim != 2 or d.shape[0] != 6:
            raise ValueError("window must be a 6 x n matrix")
        if d.shape[1] < 1:
            raise EmptyWindowError("window must contain at least one sample")
        if not np.all(np.isfinite(d)):
            raise ValueError("window entries must be finite")
        object.__setattr__(self, "data", d)

    @property
    def n(self) -> int:
        return self.data.shape[1]

    @staticmethod
    def from_wrenches(wrenches) -> "WrenchWindow":
        return WrenchWindow(np.array([w.as_array() for w in wrenches]).T)

    def mirrored_y(self) -> "WrenchWindow":
        from .types import mirror_y

        cols = [mirror_y(Wrench(c[:3], c[3:])).as_array() for c in self.data.T]
        return WrenchWindow(np.array(cols).T)

    def last_seconds(self, seconds: float) -> "WrenchWindow":
        n = max(1, int(round(seconds * SAMPLE_RATE)))
        return WrenchWindow(self.data[:, -n:])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        for row in self.data:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "WrenchWindow":
        rows = [[float(v) for v in row] for row in csv.reader(io.StringIO(text)) if row]
        return WrenchWindow(np.array(rows))


@dataclass
class LabeledDataset:
    windows: list  # of WrenchWindow
    labels: list  # of ContactSide
    split_seed: int = 0

    def __post_init__(self):
        if len(self.windows) != len(self.labels):
            raise ValueError("windows and labels must have equal length")

    def __len__(self) -> int:
        return len(self.windows)

    def split(self, test_fraction: float = 0.2):
        """Deterministic random train/test split by split_seed."""
        rng = np.random.default_rng(self.split_seed)
        perm = rng.permutation(len(self))
        n_test = int(round(len(self) * test_fraction))
        test_idx, train_idx = perm[:n_test], perm[n_test:]
        pick = lambda idx: LabeledDataset(
            [self.windows[i] for i in idx], [self.labels[i] for i in idx], self.split_seed
        )
        return pick(train_idx), pick(test_idx)

    def augmented_with_mirror(self) -> "LabeledDataset":
        wins = list(self.windows) + [w.mirrored_y() for w in self.windows]
        labs = list(self.labels) + [l.opposite() for l in self.labels]
        return LabeledDataset(wins, labs, self.split_seed)

    def save(self, directory) -> None:
        """One CSV per window plus a JSON manifest."""
        import os

        os.makedirs(directory, exist_ok=True)
        manifest = {"schema_version": WEIGHTS_VERSION, "split_seed": self.split_seed,
                    "sample_rate": SAMPLE_RATE, "entries": []}
        for i, (w, lab) in enumerate(zip(self.windows, self.labels)):
            name = f"window_{i:04d}.csv"
            with open(os.path.join(directory, name), "w") as f:
                f.write(w.to_csv())
            manifest["entries"].append(
                {"file": name, "label": lab.value, "length": w.n}
            )
        with open(os.path.join(directory, "manifest.json"), "w") as f:
            json.dump(manifest, f, indent=2)

    @staticmethod
    def load(directory) -> "LabeledDataset":
        import os

        with open(os.path.join(directory, "manifest.json")) as f:
            manifest = json.load(f)
        windows, labels = [], []
        for e in manifest["entries"]:
            with open(os.path.join(directory, e["file"])) as f:
                windows.append(WrenchWindow.from_csv(f.read()))
            labels.append(ContactSide(e["label"]))
        return LabeledDataset(windows, labels, manifest["split_seed"])


# --- network ----------------------------------------------------------------


class _ConvPath:
    """Same-padded 1D convolution, one parallel path of a block."""

    def __init__(self, c_in, c_out, width, rng):
        scale = np.sqrt(2.0 / (c_in * width))
        self.W = rng.normal(0.0, scale, size=(c_out, c_in, width))
        self.b = np.zeros(c_out)

    def forward(self, x):
        # x: (B, C_in, n) -> (B, C_out, n)
        b, c_in, n = x.shape
        k = self.W.shape[2]
        pad_l = k // 2
        xpad = np.zeros((b, c_in, n + k - 1))
        xpad[:, :, pad_l : pad_l + n] = x
        self._xpad = xpad
        self._n = n
        y = np.empty((b, self.W.shape[0], n))
        y[:] = self.b[None, :, None]
        for j in range(k):
            y += np.einsum("bin,oi->bon", xpad[:, :, j : j + n], self.W[:, :, j])
        return y

    def backward(self, dy):
        k = self.W.shape[2]
        n = self._n
        pad_l = k // 2
        self.db = dy.sum(axis=(0, 2))
        self.dW = np.empty_like(self.W)
        dxpad = np.zeros_like(self._xpad)
        for j in range(k):
            self.dW[:, :, j] = np.einsum("bon,bin->oi", dy, self._xpad[:, :, j : j + n])
            dxpad[:, :, j : j + n] += np.einsum("bon,oi->bin", dy, self.W[:, :, j])
        return dxpad[:, :, pad_l : pad_l + n]


class _Block:
    """Parallel convolutions concatenated over channels, then ReLU."""

    def __init__(self, c_in, path_channels, widths, rng):
        self.paths = [_ConvPath(c_in, path_channels, w, rng) for w in widths]
        self.c_out = path_channels * len(widths)

    def forward(self, x):
        y = np.concatenate([p.forward(x) for p in self.paths], axis=1)
        self._mask = y > 0
        return y * self._mask

    def backward(self, dy):
        dy = dy * self._mask
        c = self.paths[0].W.shape[0]
        dx = None
        for i, p in enumerate(self.paths):
            d = p.backward(dy[:, i * c : (i + 1) * c, :])
            dx = d if dx is None else dx + d
        return dx


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 120
    batch_size: int = 16
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    plateau_patience: int = 12  # early stop when train loss stops improving
    plateau_tol: float = 1e-5

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @staticmethod
    def from_dict(d: dict) -> "TrainConfig":
        return TrainConfig(**d)


class ClassifierModel:
    """Two Inception-style blocks, global average pooling, linear 2-class head."""

    LABELS = (ContactSide.LEFT, ContactSide.RIGHT)

    def __init__(self, path_channels=PATH_CHANNELS, widths=KERNEL_WIDTHS, seed=0,
                 train_config: TrainConfig | None = None):
        rng = np.random.default_rng(seed)
        self.widths = tuple(widths)
        self.path_channels = path_channels
        self.block1 = _Block(6, path_channels, widths, rng)
        self.block2 = _Block(self.block1.c_out, path_channels, widths, rng)
        c = self.block2.c_out
        self.W_head = rng.normal(0.0, np.sqrt(1.0 / c), size=(2, c))
        self.b_head = np.zeros(2)
        self.channel_mean = np.zeros(6)
        self.channel_std = np.ones(6)
        self.train_config = train_config or TrainConfig()

    # -- parameter plumbing --------------------------------------------------

    def parameters(self):
        out = []
        for bi, block in enumerate((self.block1, self.block2)):
            for pi, p in enumerate(block.paths):
                out.append((f"block{bi+1}.path{pi}.W", p.W))
                out.append((f"block{bi+1}.path{pi}.b", p.b))
        out.append(("head.W", self.W_head))
        out.append(("head.b", self.b_head))
        return out

    def _gradients(self):
        out = []
        for bi, block in enumerate((self.block1, self.block2)):
            for pi, p in enumerate(block.paths):
                out.append((f"block{bi+1}.path{pi}.W", p.dW))
                out.append((f"block{bi+1}.path{pi}.b", p.db))
        out.append(("head.W", self.dW_head))
        out.append(("head.b", self.db_head))
        return out

    # -- forward / backward --------------------------------------------------

    def _normalize(self, x):
        return (x - self.channel_mean[None, :, None]) / self.channel_std[None, :, None]

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Probabilities for a batch: x (B, 6, n) -> (B, 2)."""
        if x.ndim != 3 or x.shape[1] != 6 or x.shape[2] < 1:
            raise EmptyWindowError("expected batch of 6 x n windows with n >= 1")
        h = self.block1.forward(self._normalize(x))
        h = self.block2.forward(h)
        self._gap_n = h.shape[2]
        g = h.mean(axis=2)
        self._gap_in = g
        logits = g @ self.W_head.T + self.b_head
        logits -= logits.max(axis=1, keepdims=True)
        e = np.exp(logits)
        return e / e.sum(axis=1, keepdims=True)

    def loss_and_grads(self, x: np.ndarray, y: np.ndarray):
        """Mean cross-entropy over the batch plus analytic parameter grads.

        y holds class indices (0 = left, 1 = right).
        """
        probs = self.forward(x)
        b = len(y)
        loss = -np.mean(np.log(probs[np.arange(b), y] + 1e-300))
        dlogits = probs.copy()
        dlogits[np.arange(b), y] -= 1.0
        dlogits /= b
        self.dW_head = dlogits.T @ self._gap_in
        self.db_head = dlogits.sum(axis=0)
        dg = dlogits @ self.W_head
        dh = np.repeat(dg[:, :, None], self._gap_n, axis=2) / self._gap_n
        dh = self.block2.backward(dh)
        self.block1.backward(dh)
        return loss, dict(self._gradients())

    def predict(self, window: WrenchWindow) -> tuple[ContactSide, float]:
        probs = self.forward(window.data[None, :, :])[0]
        idx = int(np.argmax(probs))
        return self.LABELS[idx], float(probs[idx])

    # -- persistence ----------------------------------------------------------

    def save(self, path) -> None:
        arrays = {name: arr for name, arr in self.parameters()}
        np.savez(
            path,
            version=np.array(WEIGHTS_VERSION),
            path_channels=np.array(self.path_channels),
            widths=np.array(self.widths),
            channel_mean=self.channel_mean,
            channel_std=self.channel_std,
            train_config=np.frombuffer(
                json.dumps(self.train_config.to_dict()).encode(), dtype=np.uint8
            ),
            **arrays,
        )

    @staticmethod
    def load(path) -> "ClassifierModel":
        data = np.load(path)
        if int(data["version"]) != WEIGHTS_VERSION:
            raise ValueError(f"unsupported weights version {int(data['version'])}")
        cfg = TrainConfig.from_dict(
            json.loads(bytes(data["train_config"]).decode())
        )
        model = ClassifierModel(
            path_channels=int(data["path_channels"]),
            widths=tuple(int(w) for w in data["widths"]),
            train_config=cfg,
        )
        model.channel_mean = data["channel_mean"]
        model.channel_std = data["channel_std"]
        for name, arr in model.parameters():
            arr[...] = data[name]
        return model


def _batchify(dataset: LabeledDataset, seconds: float):
    n = max(1, int(round(seconds * SAMPLE_RATE)))
    longest = max(w.n for w in dataset.windows)
    if n > longest:
        raise DurationTooLongError(
            f"requested {n} samples but longest window has {longest}"
        )
    x = np.array([w.last_seconds(seconds).data for w in dataset.windows])
    y = np.array([ClassifierModel.LABELS.index(l) for l in dataset.labels])
    return x, y


def train_classifier(
    dataset: LabeledDataset,
    window_seconds: float,
    train_config: TrainConfig | None = None,
) -> tuple[ClassifierModel, float]:
    """Train on an 80/20 split and report held-out accuracy.

    Windows are truncated to the requested duration (most recent samples).
    Per-channel normalization statistics come from the training split only.
    Deterministic for fixed seeds.
    """
    cfg = train_config or TrainConfig()
    train_set, test_set = dataset.split()
    for side in ClassifierModel.LABELS:
        if side not in train_set.labels:
            raise ClassMissingError(f"class {side.value} missing from training split")

    x_train, y_train = _batchify(train_set, window_seconds)
    x_test, y_test = _batchify(test_set, window_seconds)

    model = ClassifierModel(seed=cfg.seed, train_config=cfg)
    flat = x_train.transpose(1, 0, 2).reshape(6, -1)
    model.channel_mean = flat.mean(axis=1)
    model.channel_std = np.maximum(flat.std(axis=1), 1e-8)

    params = model.parameters()
    m = {name: np.zeros_like(p) for name, p in params}
    v = {name: np.zeros_like(p) for name, p in params}
    rng = np.random.default_rng(cfg.seed + 1)
    t = 0
    best_loss, stale = np.inf, 0
    for _epoch in range(cfg.epochs):
        order = rng.permutation(len(y_train))
        epoch_loss = 0.0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = model.loss_and_grads(x_train[idx], y_train[idx])
            epoch_loss += loss * len(idx)
            t += 1
            for name, p in params:
                g = grads[name]
                m[name] = cfg.beta1 * m[name] + (1 - cfg.beta1) * g
                v[name] = cfg.beta2 * v[name] + (1 - cfg.beta2) * g * g
                mhat = m[name] / (1 - cfg.beta1**t)
                vhat = v[name] / (1 - cfg.beta2**t)
                p -= cfg.learning_rate * mhat / (np.sqrt(vhat) + cfg.eps)
        epoch_loss /= len(y_train)
        if epoch_loss < best_loss - cfg.plateau_tol:
            best_loss, stale = epoch_loss, 0
        else:
            stale += 1
            if stale >= cfg.plateau_patience:
                break

    probs = model.forward(x_test)
    accuracy = float(np.mean(np.argmax(probs, axis=1) == y_test))
    return model, accuracy


TABLE_DURATIONS = (10.0, 5.0, 2.0, 1.0, 0.5, 0.2, 0.1, 0.05)


def history_length_sweep(
    dataset: LabeledDataset,
    durations=TABLE_DURATIONS,
    train_config: TrainConfig | None = None,
) -> list:
    """Train one classifier per window duration; report accuracy per row."""
    cfg = train_config or TrainConfig()
    rows = []
    for i, seconds in enumerate(durations):
        row_cfg = TrainConfig(**{**cfg.to_dict(), "seed": cfg.seed + 1000 * i})
        _model, acc = train_classifier(dataset, seconds, row_cfg)
        n = max(1, int(round(seconds * SAMPLE_RATE)))
        rows.append(
            {
                "duration_s": seconds,
                "history_length": min(n, max(w.n for w in dataset.windows)),
                "accuracy": acc,
            }
        )
    return rows


def sweep_report_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["duration_s", "history_length", "accuracy"])
    for r in rows:
        w.writerow([r["duration_s"], r["history_length"], r["accuracy"]])
    return buf.getvalue()


# --- dataset generation from simulated collisions ---------------------------


def generate_dataset(
    policy,
    trials: int = 80,
    seed: int = 0,
    window_seconds: float = 10.0,
    split_seed: int = 0,
) -> LabeledDataset:
    """Collect labeled post-collision wrench streams from scripted rollouts.

    Alternating left/right collision scenarios (lateral goal-estimate offsets)
    are rolled out without recovery; once the attractor prediction stagnates,
    the commanded press is held and the wrench stream recorded for
    `window_seconds`. Labels come from the known offset side. Trials that
    never collide are discarded with a warning.
    """
    from . import runtime as rt
    from .sim import spawn_scenario

    ss = np.random.SeedSequence(seed)
    windows, labels = [], []
    for i in range(trials):
        # positive-y goal error collides with the positive-y flank: right side
        side = ContactSide.RIGHT if i % 2 == 0 else ContactSide.LEFT
        preset = "goal_4" if side is ContactSide.RIGHT else "goal_5"
        config, start, goal = spawn_scenario(preset)
        trial_seed = int(ss.spawn(1)[0].generate_state(1)[0])
        stream = rt.collision_wrench_stream(
            policy, config, start, goal, seed=trial_seed, duration=window_seconds
        )
        if stream is None:
            warnings.warn(f"trial {i}: no collision occurred; discarded")
            continue
        windows.append(WrenchWindow.from_wrenches(stream))
        labels.append(side)
    return LabeledDataset(windows, labels, split_seed)
