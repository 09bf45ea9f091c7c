"""Dataset plumbing: a small binary on-disk format, converters for the
public citation / co-purchase / co-author sources, an HTTP fetcher with
a per-dataset cache lock, and the split generators the experiments use.

The native layout is one directory per dataset:

    meta.json     counts, class count, undirected flag, sha256 of bins
    edges.bin     little-endian uint32 pairs; one record per undirected
                  edge (src < dst) when meta says undirected, otherwise
                  one per directed edge in canonical sorted order
    features.bin  little-endian float32, row-major, num_nodes rows
    labels.bin    little-endian uint16
    split.json    optional index arrays (public splits ship here)

Everything is written canonically, so loading a directory and saving it
again reproduces the original bytes.
"""

import gzip
import hashlib
import io
import json
import os
import pickle
import time
import warnings
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import requests
import scipy.sparse as sp
from filelock import FileLock

from .errors import DataFormatError, FetchError, InputError
from .graph import Graph, bfs_distance_groups

FORMAT_VERSION = 1
CACHE_ENV_VAR = "GRAPHEM_CACHE"

_PLANETOID_BASE = "https://github.com/kimiyoung/planetoid/raw/master/data"
_PLANETOID_PARTS = ("x", "y", "tx", "ty", "allx", "ally", "graph",
                    "test.index")
_NPZ_BASE = "https://github.com/shchur/gnn-benchmark/raw/master/data/npz"
_OGB_ARXIV_URL = "https://snap.stanford.edu/ogb/data/nodeproppred/arxiv.zip"

# expected counts per the published statistics; edge records are
# undirected pairs except for ogbn-arxiv, which ships directed
DATASETS = {
    "cora": {"kind": "planetoid", "expect": (2708, 5278, 1433, 7)},
    "citeseer": {"kind": "planetoid", "expect": (3327, 4552, 3703, 6)},
    "pubmed": {"kind": "planetoid", "expect": (19717, 44324, 500, 3)},
    "amazon-photo": {"kind": "npz", "file": "amazon_electronics_photo.npz",
                     "expect": (7650, 119081, 745, 8)},
    "amazon-computers": {"kind": "npz",
                         "file": "amazon_electronics_computers.npz",
                         "expect": (13752, 245861, 767, 10)},
    "coauthor-cs": {"kind": "npz", "file": "ms_academic_cs.npz",
                    "expect": (18333, 81894, 6805, 15)},
    "coauthor-physics": {"kind": "npz", "file": "ms_academic_phy.npz",
                         "expect": (34493, 247962, 8415, 5)},
    "ogbn-arxiv": {"kind": "ogb", "expect": (169343, 1166243, 128, 40)},
}

# source checksums pin on first fetch: the table ships empty and the
# fetcher records sha256 digests into meta.json, so any later re-fetch
# of the same cache can detect upstream drift
PINNED_SOURCE_SHA256 = {}


def _sha256_hex(data):
    return hashlib.sha256(data).hexdigest()


def _canonical_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


@dataclass
class Split:
    """Sorted, disjoint train/val/test node index sets."""
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for name in ("train", "val", "test"):
            idx = np.unique(np.asarray(getattr(self, name), dtype=np.int64))
            if idx.size and idx.min() < 0:
                raise InputError(f"{name} contains negative indices")
            setattr(self, name, idx)
        if (np.intersect1d(self.train, self.val).size
                or np.intersect1d(self.train, self.test).size
                or np.intersect1d(self.val, self.test).size):
            raise InputError("split parts overlap")

    def check_range(self, num_nodes):
        for name in ("train", "val", "test"):
            idx = getattr(self, name)
            if idx.size and idx.max() >= num_nodes:
                raise InputError(f"{name} indexes past {num_nodes} nodes")

    def to_dict(self):
        return {"train": self.train.tolist(), "val": self.val.tolist(),
                "test": self.test.tolist()}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(train=d["train"], val=d["val"], test=d["test"])
        except KeyError as exc:
            raise DataFormatError(f"split record misses key {exc}")


def save_split(split, path):
    Path(path).write_text(_canonical_json(split.to_dict()))


def load_split(path):
    path = Path(path)
    try:
        return Split.from_dict(json.loads(path.read_text()))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path.name}: invalid JSON ({exc})")


@dataclass
class SplitSpec:
    """How to derive the train/val/test sets for one run."""
    kind: str = "per-class"
    per_class: int = 20
    val_size: int = 500
    test_size: int = 1000
    rate: float = None
    inductive: bool = False
    seed: int = 0

    def __post_init__(self):
        kinds = ("public", "per-class", "rate", "hop-distance")
        if self.kind not in kinds:
            raise InputError(f"split kind must be one of {kinds}")
        if self.kind == "rate" and self.rate is None:
            raise InputError("rate split needs a rate")
        if self.per_class < 1 or self.val_size < 1 or self.test_size < 1:
            raise InputError("split sizes must be positive")


@dataclass
class DatasetBundle:
    """A graph dataset in memory, validated against its own metadata."""
    name: str
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    undirected: bool = True
    source_urls: tuple = ()
    source_checksums: dict = field(default_factory=dict)
    split: Split = None

    def validate(self):
        n = self.graph.num_nodes
        if self.features.ndim != 2 or self.features.shape[0] != n:
            raise DataFormatError(
                f"features: {self.features.shape} rows do not match "
                f"{n} nodes")
        if self.labels.shape != (n,):
            raise DataFormatError(
                f"labels: shape {self.labels.shape}, want ({n},)")
        if self.num_classes < 2 or self.num_classes > np.iinfo(np.uint16).max:
            raise DataFormatError(f"num_classes {self.num_classes} out of "
                                  "the storable range")
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise DataFormatError("labels outside [0, num_classes)")
        if self.undirected and not self.graph.is_symmetric():
            raise DataFormatError("undirected flag set on an asymmetric "
                                  "edge set")
        if self.split is not None:
            self.split.check_range(n)
        return self

    @property
    def num_edge_records(self):
        """Records edges.bin would hold: pairs if undirected."""
        if self.undirected:
            return int(np.count_nonzero(self.graph.src < self.graph.dst))
        return self.graph.num_edges


def save_dataset(bundle, path, split=None):
    """Write the native layout; canonical bytes for identical bundles."""
    bundle.validate()
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    if bundle.undirected:
        keep = bundle.graph.src < bundle.graph.dst
        pairs = np.stack([bundle.graph.src[keep], bundle.graph.dst[keep]],
                         axis=1)
    else:
        pairs = np.stack([bundle.graph.src, bundle.graph.dst], axis=1)
    edges_bytes = np.ascontiguousarray(pairs, dtype="<u4").tobytes()
    feat_bytes = np.ascontiguousarray(bundle.features,
                                      dtype="<f4").tobytes()
    label_bytes = np.ascontiguousarray(bundle.labels, dtype="<u2").tobytes()
    (path / "edges.bin").write_bytes(edges_bytes)
    (path / "features.bin").write_bytes(feat_bytes)
    (path / "labels.bin").write_bytes(label_bytes)
    meta = {
        "format_version": FORMAT_VERSION,
        "name": bundle.name,
        "num_nodes": bundle.graph.num_nodes,
        "num_edge_records": int(pairs.shape[0]),
        "num_features": int(bundle.features.shape[1]),
        "num_classes": int(bundle.num_classes),
        "undirected": bool(bundle.undirected),
        "checksums": {
            "edges.bin": _sha256_hex(edges_bytes),
            "features.bin": _sha256_hex(feat_bytes),
            "labels.bin": _sha256_hex(label_bytes),
        },
        "source_urls": list(bundle.source_urls),
        "source_checksums": dict(sorted(bundle.source_checksums.items())),
    }
    (path / "meta.json").write_text(_canonical_json(meta))
    split = bundle.split if split is None else split
    if split is not None:
        save_split(split, path / "split.json")
    return path


def load_dataset(path):
    """Load a native-format directory into a validated bundle.

    Every corruption mode is reported with the offending file name:
    wrong byte counts, checksum mismatches, malformed records.
    """
    path = Path(path)
    meta_path = path / "meta.json"
    if not meta_path.is_file():
        raise DataFormatError(f"meta.json: missing under {path}")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"meta.json: invalid JSON ({exc})")
    for key in ("name", "num_nodes", "num_edge_records", "num_features",
                "num_classes", "undirected", "checksums"):
        if key not in meta:
            raise DataFormatError(f"meta.json: missing key {key!r}")
    n = int(meta["num_nodes"])
    e = int(meta["num_edge_records"])
    f = int(meta["num_features"])

    expected_bytes = {"edges.bin": e * 8, "features.bin": n * f * 4,
                      "labels.bin": n * 2}
    blobs = {}
    for fname, want in expected_bytes.items():
        fpath = path / fname
        if not fpath.is_file():
            raise DataFormatError(f"{fname}: missing under {path}")
        data = fpath.read_bytes()
        if len(data) != want:
            raise DataFormatError(
                f"{fname}: expected {want} bytes, found {len(data)}")
        digest = meta["checksums"].get(fname)
        if digest != _sha256_hex(data):
            raise DataFormatError(f"{fname}: checksum mismatch")
        blobs[fname] = data

    pairs = np.frombuffer(blobs["edges.bin"], dtype="<u4").astype(
        np.int64).reshape(e, 2)
    undirected = bool(meta["undirected"])
    if undirected and e and not np.all(pairs[:, 0] < pairs[:, 1]):
        raise DataFormatError("edges.bin: undirected records must satisfy "
                              "src < dst")
    graph = Graph(n, pairs[:, 0], pairs[:, 1], undirected_input=undirected)
    want_directed = 2 * e if undirected else e
    if graph.num_edges != want_directed:
        raise DataFormatError(
            f"edges.bin: {e} records reduce to {graph.num_edges} canonical "
            f"edges, expected {want_directed} (duplicates?)")
    features = np.frombuffer(blobs["features.bin"], dtype="<f4").reshape(
        n, f).astype(np.float32)
    labels = np.frombuffer(blobs["labels.bin"], dtype="<u2").astype(np.int64)

    split = None
    if (path / "split.json").is_file():
        split = load_split(path / "split.json")
    bundle = DatasetBundle(
        name=meta["name"], graph=graph, features=features, labels=labels,
        num_classes=int(meta["num_classes"]), undirected=undirected,
        source_urls=tuple(meta.get("source_urls", ())),
        source_checksums=dict(meta.get("source_checksums", {})),
        split=split)
    return bundle.validate()


def content_hash(path):
    """Order-independent digest of a dataset directory's file contents."""
    h = hashlib.sha256()
    for p in sorted(Path(path).rglob("*")):
        if not p.is_file():
            continue
        rel = p.relative_to(path).as_posix().encode()
        data = p.read_bytes()
        h.update(len(rel).to_bytes(8, "little"))
        h.update(rel)
        h.update(len(data).to_bytes(8, "little"))
        h.update(data)
    return h.hexdigest()


def _check_counts(name, num_nodes, num_records, num_features, num_classes):
    expect = DATASETS[name]["expect"]
    got = (num_nodes, num_records, num_features, num_classes)
    fields = ("num_nodes", "num_edge_records", "num_features", "num_classes")
    bad = [f"{fields[k]}: expected {expect[k]}, got {got[k]}"
           for k in range(4) if expect[k] != got[k]]
    if bad:
        raise DataFormatError(f"{name}: " + "; ".join(bad))


def _undirected_pairs(src, dst, num_nodes):
    """Canonical (lo, hi) pairs: self-loops and duplicates removed."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if src.size and (src.min() < 0 or dst.min() < 0
                     or max(src.max(), dst.max()) >= num_nodes):
        raise DataFormatError("edge endpoint out of node range")
    off = src != dst
    lo = np.minimum(src[off], dst[off])
    hi = np.maximum(src[off], dst[off])
    key = np.unique(lo * np.int64(num_nodes) + hi)
    return key // num_nodes, key % num_nodes


def convert_planetoid(files, name):
    """Raw pickled citation files to a bundle plus the public split.

    ``files`` maps part suffix to raw bytes. Feature/label rows for the
    test block follow the order of test.index; index gaps (isolated
    citeseer crawl misses) become zero-feature nodes outside every
    split part.
    """
    def _loads(tag):
        try:
            return pickle.loads(files[tag], encoding="latin1")
        except KeyError:
            raise DataFormatError(f"ind.{name}.{tag}: missing part")
        except Exception as exc:
            raise DataFormatError(f"ind.{name}.{tag}: cannot unpickle "
                                  f"({exc})")

    y = np.asarray(_loads("y"))
    ty = np.asarray(_loads("ty"))
    ally = np.asarray(_loads("ally"))
    allx = sp.csr_matrix(_loads("allx"))
    tx = sp.csr_matrix(_loads("tx"))
    adj_dict = _loads("graph")
    try:
        test_idx = np.array(
            [int(tok) for tok in files["test.index"].decode().split()],
            dtype=np.int64)
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"ind.{name}.test.index: unreadable ({exc})")

    n_all, num_features = allx.shape
    num_classes = int(ally.shape[1])
    if tx.shape[0] != test_idx.size or tx.shape[1] != num_features:
        raise DataFormatError(f"ind.{name}.tx: shape {tx.shape} does not "
                              f"match {test_idx.size} test indices")
    if ty.shape != (test_idx.size, num_classes):
        raise DataFormatError(f"ind.{name}.ty: shape {ty.shape} mismatch")
    sorted_idx = np.sort(test_idx)
    if sorted_idx[0] != n_all:
        raise DataFormatError(
            f"ind.{name}.test.index: first test node {sorted_idx[0]} does "
            f"not extend the {n_all} allx rows")
    n = int(sorted_idx[-1]) + 1

    features = np.zeros((n, num_features), dtype=np.float32)
    features[:n_all] = allx.toarray()
    features[test_idx] = tx.toarray()
    onehot = np.zeros((n, num_classes), dtype=np.float64)
    onehot[:n_all] = ally
    onehot[test_idx] = ty
    labels = np.argmax(onehot, axis=1).astype(np.int64)

    src, dst = [], []
    for node, peers in adj_dict.items():
        src.extend([node] * len(peers))
        dst.extend(peers)
    lo, hi = _undirected_pairs(src, dst, n)
    _check_counts(name, n, lo.size, num_features, num_classes)
    graph = Graph(n, lo, hi, undirected_input=True)
    split = Split(train=np.arange(y.shape[0]),
                  val=np.arange(y.shape[0], y.shape[0] + 500),
                  test=sorted_idx)
    bundle = DatasetBundle(name=name, graph=graph, features=features,
                           labels=labels, num_classes=num_classes,
                           undirected=True, split=split)
    return bundle.validate()


def convert_npz_bundle(data, name):
    """CSR-in-npz archives (co-purchase / co-author graphs)."""
    try:
        f = np.load(io.BytesIO(data), allow_pickle=False)
    except Exception as exc:
        raise DataFormatError(f"{name}.npz: cannot read archive ({exc})")
    with f:
        try:
            adj = sp.csr_matrix(
                (f["adj_data"], f["adj_indices"], f["adj_indptr"]),
                shape=tuple(f["adj_shape"]))
            if "attr_data" in f.files:
                attr = sp.csr_matrix(
                    (f["attr_data"], f["attr_indices"], f["attr_indptr"]),
                    shape=tuple(f["attr_shape"])).toarray()
            else:
                attr = np.asarray(f["attr_matrix"])
            labels = np.asarray(f["labels"], dtype=np.int64)
        except KeyError as exc:
            raise DataFormatError(f"{name}.npz: missing array {exc}")
    n = adj.shape[0]
    coo = adj.tocoo()
    lo, hi = _undirected_pairs(coo.row, coo.col, n)
    num_classes = int(labels.max()) + 1
    _check_counts(name, n, lo.size, attr.shape[1], num_classes)
    graph = Graph(n, lo, hi, undirected_input=True)
    bundle = DatasetBundle(name=name, graph=graph,
                           features=attr.astype(np.float32), labels=labels,
                           num_classes=num_classes, undirected=True)
    return bundle.validate()


def convert_ogb_arxiv(data, name="ogbn-arxiv"):
    """The arxiv citation zip: gzipped CSVs, directed edges, time split."""
    try:
        zf = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise DataFormatError(f"{name}.zip: {exc}")

    def _member(suffix):
        for member in zf.namelist():
            if member.endswith(suffix):
                return gzip.decompress(zf.read(member))
        raise DataFormatError(f"{name}.zip: no member ends with {suffix}")

    def _csv_array(suffix, dtype):
        return np.loadtxt(io.BytesIO(_member(suffix)), delimiter=",",
                          dtype=dtype, ndmin=2)

    edges = _csv_array("raw/edge.csv.gz", np.int64)
    features = _csv_array("raw/node-feat.csv.gz", np.float32)
    labels = _csv_array("raw/node-label.csv.gz", np.int64).ravel()
    split = Split(
        train=_csv_array("split/time/train.csv.gz", np.int64).ravel(),
        val=_csv_array("split/time/valid.csv.gz", np.int64).ravel(),
        test=_csv_array("split/time/test.csv.gz", np.int64).ravel())
    n = features.shape[0]
    num_classes = int(labels.max()) + 1
    _check_counts(name, n, edges.shape[0], features.shape[1], num_classes)
    graph = Graph(n, edges[:, 0], edges[:, 1], undirected_input=False)
    if graph.num_edges != edges.shape[0]:
        raise DataFormatError(f"{name}: duplicate directed edges in source")
    bundle = DatasetBundle(name=name, graph=graph, features=features,
                           labels=labels, num_classes=num_classes,
                           undirected=False, split=split)
    return bundle.validate()


def dataset_urls(name):
    info = DATASETS[name]
    if info["kind"] == "planetoid":
        return {f"ind.{name}.{part}": f"{_PLANETOID_BASE}/ind.{name}.{part}"
                for part in _PLANETOID_PARTS}
    if info["kind"] == "npz":
        return {info["file"]: f"{_NPZ_BASE}/{info['file']}"}
    return {"arxiv.zip": _OGB_ARXIV_URL}


def default_cache_dir():
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env).expanduser()
    return Path("~/.cache/graphem").expanduser()


def _default_http_get(url, retries=3, timeout=60.0):
    reason = "no attempt made"
    for attempt in range(retries):
        if attempt:
            time.sleep(min(2.0 ** attempt, 8.0))
        try:
            resp = requests.get(url, timeout=timeout)
        except requests.RequestException as exc:
            reason = str(exc)
            continue
        if resp.status_code == 200:
            return resp.content
        reason = f"HTTP {resp.status_code}"
        if 400 <= resp.status_code < 500:
            raise FetchError(f"GET {url}: {reason}", retryable=False)
    raise FetchError(f"GET {url} failed after {retries} attempts: {reason}",
                     retryable=True)


def fetch_dataset(name, cache_dir=None, http_get=None, force=False):
    """Download, convert and cache a dataset; returns the directory.

    A cached directory short-circuits the network entirely (its bin
    checksums are still verified). Source files are checked against
    pinned sha256 digests when the pin table has them and recorded into
    meta.json either way.
    """
    if name not in DATASETS:
        raise InputError(
            f"unknown dataset {name!r}; known: {', '.join(sorted(DATASETS))}")
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cache.mkdir(parents=True, exist_ok=True)
    target = cache / name
    get = _default_http_get if http_get is None else http_get

    with FileLock(str(cache / f"{name}.lock")):
        if (target / "meta.json").is_file() and not force:
            load_dataset(target)
            return target

        urls = dataset_urls(name)
        raw = {}
        checksums = {}
        for fname, url in urls.items():
            blob = get(url)
            digest = _sha256_hex(blob)
            pinned = PINNED_SOURCE_SHA256.get(fname)
            if pinned is not None and pinned != digest:
                raise FetchError(
                    f"{fname}: sha256 {digest} does not match pin {pinned}",
                    retryable=False)
            raw[fname] = blob
            checksums[fname] = digest

        kind = DATASETS[name]["kind"]
        if kind == "planetoid":
            parts = {part: raw[f"ind.{name}.{part}"]
                     for part in _PLANETOID_PARTS}
            bundle = convert_planetoid(parts, name)
        elif kind == "npz":
            bundle = convert_npz_bundle(raw[DATASETS[name]["file"]], name)
        else:
            bundle = convert_ogb_arxiv(raw["arxiv.zip"], name)
        bundle.source_urls = tuple(urls.values())
        bundle.source_checksums = checksums
        save_dataset(bundle, target)
    return target


def make_semi_split(labels, spec, rng):
    """Per-class training nodes, then validation, then test.

    Draw order is fixed: per-class train sets in class order, then
    ``val_size`` validation nodes from the remainder, then
    ``test_size`` test nodes from what is left.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.size
    num_classes = int(labels.max()) + 1
    picked = []
    for c in range(num_classes):
        members = np.flatnonzero(labels == c)
        if members.size < spec.per_class:
            raise InputError(
                f"class {c} has {members.size} nodes, needs "
                f">= {spec.per_class}")
        picked.append(rng.choice(members, size=spec.per_class,
                                 replace=False))
    train = np.sort(np.concatenate(picked))
    pool = np.setdiff1d(np.arange(n), train)
    if pool.size < spec.val_size + spec.test_size:
        raise InputError(
            f"{pool.size} unlabeled nodes cannot host val {spec.val_size} "
            f"+ test {spec.test_size}")
    val = rng.choice(pool, size=spec.val_size, replace=False)
    rest = np.setdiff1d(pool, val)
    test = rng.choice(rest, size=spec.test_size, replace=False)
    return Split(train=train, val=val, test=test)


def make_hop_split(graph, labels, rng, per_class=20, val_size=500,
                   group_size=100):
    """Per-class train set plus test groups keyed by BFS distance.

    Distance 0 is the training set itself and never tested. Groups
    with fewer than ``group_size`` non-train non-val members are
    dropped with a warning. Returns (split, groups) with groups mapping
    distance to its sampled test nodes.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if per_class < 1 or val_size < 1 or group_size < 1:
        raise InputError("split sizes must be positive")
    picked = []
    for c in range(int(labels.max()) + 1):
        members = np.flatnonzero(labels == c)
        if members.size < per_class:
            raise InputError(f"class {c} has {members.size} nodes, needs "
                             f">= {per_class}")
        picked.append(rng.choice(members, size=per_class, replace=False))
    train = np.sort(np.concatenate(picked))
    dist = bfs_distance_groups(graph, train)

    pool = np.setdiff1d(np.arange(labels.size), train)
    if pool.size < val_size:
        raise InputError("not enough nodes for the validation set")
    val = rng.choice(pool, size=val_size, replace=False)
    remaining = np.setdiff1d(pool, val)

    groups = {}
    for d in np.unique(dist):
        if d < 1:
            continue  # distance 0 is train; -1 is unreachable
        members = remaining[dist[remaining] == d]
        if members.size < group_size:
            warnings.warn(
                f"distance-{d} group has {members.size} candidates; "
                f"dropped (need {group_size})")
            continue
        groups[int(d)] = np.sort(rng.choice(members, size=group_size,
                                            replace=False))
    if not groups:
        raise InputError("no distance group reached the required size")
    test = np.sort(np.concatenate(list(groups.values())))
    return Split(train=train, val=val, test=test), groups


def make_rate_split(labels, rate, rng):
    """Random rate% train nodes; remainder split evenly val then test."""
    if not 0.0 < rate < 100.0:
        raise InputError(f"rate must sit in (0, 100), got {rate}")
    n = np.asarray(labels).shape[0]
    train_count = int(np.floor(n * rate / 100.0))
    if train_count < 1:
        raise InputError(f"rate {rate}% of {n} nodes rounds to zero")
    perm = rng.permutation(n)
    remainder = perm[train_count:]
    if remainder.size < 2:
        raise InputError("remainder too small to split into val and test")
    half = remainder.size // 2
    return Split(train=perm[:train_count], val=remainder[:half],
                 test=remainder[half:])
