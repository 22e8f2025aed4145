"""Shared test fixtures: random sequence factories and a synthetic
classroom (per-class smooth trajectories with controllable noise and
near-target impostor words) used by the end-to-end checks."""

import json
import os

import numpy as np
import pytest

from fewshotword import CodeSequence, FeatureSequence


def random_fseq(rng, max_t=10, max_d=4, t=None, d=None):
    t = t if t is not None else rng.randint(1, max_t + 1)
    d = d if d is not None else rng.randint(1, max_d + 1)
    return FeatureSequence(rng.randn(t, d).astype(np.float32))


def random_cseq(rng, alphabet_size, max_t=8, t=None):
    t = t if t is not None else rng.randint(1, max_t + 1)
    return CodeSequence(rng.randint(0, alphabet_size, t), alphabet_size)


@pytest.fixture
def rng():
    return np.random.RandomState(1234)


class Classroom:
    """Synthetic word classes as smooth trajectories in feature space.

    Each class is a fixed sequence of waypoints; items are the densified
    trajectory plus white noise.  Impostor words reuse a target class's
    trajectory with a fixed small offset, mimicking a phonetically close
    word.
    """

    def __init__(self, n_classes=16, dim=8, n_impostor=3, seed=0):
        self.dim = dim
        self.gen = np.random.RandomState(seed)
        self.names = [f"word{idx:02d}" for idx in range(n_classes)]
        self.anchors = {}
        for name in self.names:
            n_way = self.gen.randint(3, 6)
            self.anchors[name] = self.gen.randn(n_way, dim) * 3.0
        self.impostor_targets = self.names[:n_impostor]
        self.impostor_offsets = {
            name: self.gen.randn(dim) * 0.8 for name in self.impostor_targets
        }

    def _trajectory(self, anchors, t):
        grid = np.linspace(0, anchors.shape[0] - 1, t)
        lo = np.floor(grid).astype(int)
        hi = np.minimum(lo + 1, anchors.shape[0] - 1)
        frac = (grid - lo)[:, None]
        return anchors[lo] * (1 - frac) + anchors[hi] * frac

    def item(self, name, sigma=0.1, impostor=False):
        t = self.gen.randint(18, 30)
        base = self.anchors[name]
        traj = self._trajectory(base, t)
        if impostor:
            traj = traj + self.impostor_offsets[name]
        traj = traj + self.gen.randn(t, self.dim) * sigma
        return FeatureSequence(traj.astype(np.float32))

    def other_class(self, name):
        choices = [n for n in self.names if n != name]
        return choices[self.gen.randint(len(choices))]


def build_classroom_manifest(root, classroom, n_templates=15, sigma=0.1,
                             pos_range=(6, 15)):
    """Write .fseq items + manifest under root; returns the manifest path.

    Per class and split: n positives (uniform in pos_range) and n
    negatives.  For impostor-target classes the negatives are impostor
    renditions of the class itself; otherwise they are items of another
    class presented as this one.
    """
    from fewshotword import write_fseq

    root = str(root)
    os.makedirs(f"{root}/items", exist_ok=True)
    entries = []
    gen = classroom.gen

    def add(seq, item_id, name, role, label, speaker):
        path = f"items/{item_id}.fseq"
        write_fseq(seq, f"{root}/{path}")
        entries.append({"id": item_id, "class": name, "path": path,
                        "role": role, "label": label, "speaker": speaker})

    for name in classroom.names:
        for i in range(n_templates):
            add(classroom.item(name, sigma=sigma), f"{name}-tpl{i:02d}",
                name, "template", "positive", f"adult{i}")
        for role in ("dev", "test"):
            n_pos = gen.randint(pos_range[0], pos_range[1] + 1)
            for i in range(n_pos):
                add(classroom.item(name, sigma=sigma),
                    f"{name}-{role}-pos{i:02d}", name, role, "positive",
                    f"child{i}")
            for i in range(n_pos):
                if name in classroom.impostor_targets:
                    seq = classroom.item(name, sigma=sigma, impostor=True)
                    label = "impostor"
                else:
                    seq = classroom.item(classroom.other_class(name),
                                         sigma=sigma)
                    label = "negative"
                add(seq, f"{name}-{role}-neg{i:02d}", name, role, label,
                    f"child{i}")

    manifest_path = f"{root}/manifest.jsonl"
    with open(manifest_path, "w") as fh:
        for e in entries:
            fh.write(json.dumps(e) + "\n")
    return manifest_path


@pytest.fixture
def tiny_classroom():
    return Classroom(n_classes=4, dim=4, n_impostor=1, seed=7)
