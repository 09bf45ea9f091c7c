import gzip
import io
import json
import pickle
import zipfile
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

from graphem import (DataFormatError, DatasetBundle, FetchError, Graph,
                     InputError, Split, SplitSpec, bfs_distance_groups,
                     content_hash, convert_npz_bundle, convert_ogb_arxiv,
                     convert_planetoid, default_cache_dir, fetch_dataset,
                     generate_sbm, load_dataset, load_split, make_hop_split,
                     make_rate_split, make_semi_split, save_dataset,
                     save_split)
from graphem import data_io


def _small_bundle(seed=0):
    graph, feats, labels = generate_sbm(20, 3, 0.5, 0.1, 4, 0.5, seed=seed)
    return DatasetBundle(name="toy", graph=graph,
                         features=feats.astype(np.float32),
                         labels=labels, num_classes=3)


def _unique_pairs(n, count, rng):
    """Exactly ``count`` canonical (lo, hi) pairs, no self loops."""
    draws = rng.integers(0, n, size=(count * 4, 2))
    draws = draws[draws[:, 0] != draws[:, 1]]
    lo = np.minimum(draws[:, 0], draws[:, 1])
    hi = np.maximum(draws[:, 0], draws[:, 1])
    key = np.unique(lo * n + hi)
    assert key.size >= count
    key = key[:count]
    return key // n, key % n


# ------------------------------------------------------------ native io


def test_native_roundtrip_byte_identical(tmp_path):
    bundle = _small_bundle()
    split = Split(train=np.arange(6), val=np.arange(6, 12),
                  test=np.arange(12, 20))
    a = tmp_path / "a"
    b = tmp_path / "b"
    save_dataset(bundle, a, split=split)
    loaded = load_dataset(a)
    save_dataset(loaded, b)
    files = sorted(p.name for p in a.iterdir())
    assert files == ["edges.bin", "features.bin", "labels.bin", "meta.json",
                     "split.json"]
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    np.testing.assert_array_equal(loaded.labels, bundle.labels)
    np.testing.assert_array_equal(loaded.features, bundle.features)
    assert loaded.graph.num_edges == bundle.graph.num_edges
    np.testing.assert_array_equal(loaded.split.val, split.val)


def test_load_reports_checksum_mismatch_with_file_name(tmp_path):
    save_dataset(_small_bundle(), tmp_path)
    blob = bytearray((tmp_path / "features.bin").read_bytes())
    blob[3] ^= 0xFF
    (tmp_path / "features.bin").write_bytes(bytes(blob))
    with pytest.raises(DataFormatError, match="features.bin.*checksum"):
        load_dataset(tmp_path)


def test_load_reports_truncation(tmp_path):
    save_dataset(_small_bundle(), tmp_path)
    blob = (tmp_path / "edges.bin").read_bytes()
    (tmp_path / "edges.bin").write_bytes(blob[:-8])
    with pytest.raises(DataFormatError, match="edges.bin.*expected"):
        load_dataset(tmp_path)


def test_load_reports_missing_file_and_meta_problems(tmp_path):
    save_dataset(_small_bundle(), tmp_path)
    (tmp_path / "labels.bin").unlink()
    with pytest.raises(DataFormatError, match="labels.bin.*missing"):
        load_dataset(tmp_path)
    meta_path = tmp_path / "meta.json"
    meta = json.loads(meta_path.read_text())
    del meta["num_classes"]
    meta_path.write_text(json.dumps(meta))
    with pytest.raises(DataFormatError, match="missing key.*num_classes"):
        load_dataset(tmp_path)
    meta_path.write_text("{not json")
    with pytest.raises(DataFormatError, match="meta.json.*invalid JSON"):
        load_dataset(tmp_path)
    with pytest.raises(DataFormatError, match="meta.json.*missing"):
        load_dataset(tmp_path / "nowhere")


def _repair_checksum(path, fname):
    meta_path = Path(path) / "meta.json"
    meta = json.loads(meta_path.read_text())
    data = (Path(path) / fname).read_bytes()
    meta["checksums"][fname] = data and __import__("hashlib").sha256(
        data).hexdigest()
    meta_path.write_text(json.dumps(meta))


def test_load_rejects_unordered_undirected_records(tmp_path):
    save_dataset(_small_bundle(), tmp_path)
    pairs = np.frombuffer((tmp_path / "edges.bin").read_bytes(),
                          dtype="<u4").reshape(-1, 2).copy()
    pairs[0] = pairs[0][::-1]
    (tmp_path / "edges.bin").write_bytes(pairs.tobytes())
    _repair_checksum(tmp_path, "edges.bin")
    with pytest.raises(DataFormatError, match="src < dst"):
        load_dataset(tmp_path)


def test_load_rejects_duplicate_records(tmp_path):
    save_dataset(_small_bundle(), tmp_path)
    pairs = np.frombuffer((tmp_path / "edges.bin").read_bytes(),
                          dtype="<u4").reshape(-1, 2).copy()
    pairs[1] = pairs[0]
    (tmp_path / "edges.bin").write_bytes(pairs.tobytes())
    _repair_checksum(tmp_path, "edges.bin")
    with pytest.raises(DataFormatError, match="duplicates"):
        load_dataset(tmp_path)


def test_bundle_validate_errors():
    bundle = _small_bundle()
    bad = DatasetBundle(name="t", graph=bundle.graph,
                        features=bundle.features[:5], labels=bundle.labels,
                        num_classes=3)
    with pytest.raises(DataFormatError, match="features"):
        bad.validate()
    with pytest.raises(DataFormatError, match="labels"):
        DatasetBundle(name="t", graph=bundle.graph,
                      features=bundle.features,
                      labels=bundle.labels[:5], num_classes=3).validate()
    with pytest.raises(DataFormatError, match="num_classes"):
        DatasetBundle(name="t", graph=bundle.graph,
                      features=bundle.features, labels=bundle.labels,
                      num_classes=1).validate()
    with pytest.raises(DataFormatError):
        DatasetBundle(name="t", graph=bundle.graph,
                      features=bundle.features,
                      labels=bundle.labels + 5, num_classes=3).validate()
    directed = Graph(4, [0, 1], [1, 2], undirected_input=False)
    with pytest.raises(DataFormatError, match="asymmetric"):
        DatasetBundle(name="t", graph=directed,
                      features=np.zeros((4, 2), dtype=np.float32),
                      labels=np.zeros(4, dtype=np.int64),
                      num_classes=2).validate()


def test_num_edge_records_counts_pairs():
    bundle = _small_bundle()
    assert bundle.num_edge_records == bundle.graph.num_edges // 2


# ---------------------------------------------------------------- split


def test_split_sorts_and_rejects_overlap():
    s = Split(train=[3, 1, 1], val=[2], test=[5, 4])
    np.testing.assert_array_equal(s.train, [1, 3])
    np.testing.assert_array_equal(s.test, [4, 5])
    with pytest.raises(InputError, match="overlap"):
        Split(train=[0, 1], val=[1], test=[2])
    with pytest.raises(InputError, match="negative"):
        Split(train=[-1], val=[1], test=[2])
    with pytest.raises(InputError, match="indexes past"):
        Split(train=[0], val=[1], test=[9]).check_range(5)


def test_split_json_roundtrip(tmp_path):
    s = Split(train=[0, 1], val=[2], test=[3, 4])
    path = tmp_path / "split.json"
    save_split(s, path)
    t = load_split(path)
    np.testing.assert_array_equal(s.train, t.train)
    np.testing.assert_array_equal(s.test, t.test)
    path.write_text("[1, 2")
    with pytest.raises(DataFormatError, match="invalid JSON"):
        load_split(path)
    with pytest.raises(DataFormatError, match="misses key"):
        Split.from_dict({"train": [0], "val": [1]})


def test_split_spec_validation():
    with pytest.raises(InputError, match="kind"):
        SplitSpec(kind="random")
    with pytest.raises(InputError, match="needs a rate"):
        SplitSpec(kind="rate")
    with pytest.raises(InputError, match="positive"):
        SplitSpec(val_size=0)
    assert SplitSpec(kind="rate", rate=5.0).rate == 5.0


# ------------------------------------------------------------ planetoid


def _synthetic_planetoid(name, n, records, f, c, n_test, n_train, seed=0,
                         test_gaps=()):
    """Raw part bytes shaped like the citation pickles."""
    rng = np.random.default_rng(seed)
    n_all = n - n_test - len(test_gaps)
    candidates = np.setdiff1d(np.arange(n_all, n), np.asarray(test_gaps))
    assert candidates.size == n_test and candidates[0] == n_all
    test_idx = rng.permutation(candidates)

    def _onehot(rows):
        out = np.zeros((rows, c), dtype=np.int32)
        out[np.arange(rows), rng.integers(0, c, size=rows)] = 1
        return out

    allx = sp.random(n_all, f, density=0.01, format="csr",
                     random_state=seed, dtype=np.float64)
    tx = sp.random(n_test, f, density=0.01, format="csr",
                   random_state=seed + 1, dtype=np.float64)
    ally = _onehot(n_all)
    ty = _onehot(n_test)
    y = ally[:n_train]
    lo, hi = _unique_pairs(n, records, rng)
    adj = {}
    for a, b in zip(lo.tolist(), hi.tolist()):
        adj.setdefault(a, []).append(b)
    parts = {"x": allx[:n_train], "y": y, "tx": tx, "ty": ty,
             "allx": allx, "ally": ally, "graph": adj}
    files = {tag: pickle.dumps(obj, protocol=2)
             for tag, obj in parts.items()}
    files["test.index"] = "\n".join(str(i) for i in test_idx).encode()
    return files, {"test_idx": test_idx, "tx": tx.toarray(), "ty": ty,
                   "n_all": n_all}


def test_convert_planetoid_full_size():
    files, ref = _synthetic_planetoid("cora", 2708, 5278, 1433, 7,
                                      n_test=1000, n_train=140)
    bundle = convert_planetoid(files, "cora")
    assert bundle.graph.num_nodes == 2708
    assert bundle.num_edge_records == 5278
    assert bundle.features.shape == (2708, 1433)
    assert bundle.num_classes == 7
    np.testing.assert_array_equal(bundle.split.train, np.arange(140))
    np.testing.assert_array_equal(bundle.split.val, np.arange(140, 640))
    np.testing.assert_array_equal(bundle.split.test,
                                  np.sort(ref["test_idx"]))
    # tx rows land on the nodes test.index names, in file order
    k = 17
    node = ref["test_idx"][k]
    np.testing.assert_allclose(bundle.features[node], ref["tx"][k],
                               atol=1e-6)
    assert bundle.labels[node] == np.argmax(ref["ty"][k])


def test_convert_planetoid_handles_test_index_gaps():
    gaps = tuple(range(2320, 2335))  # 15 crawl misses, like the source
    files, ref = _synthetic_planetoid("citeseer", 3327, 4552, 3703, 6,
                                      n_test=1000, n_train=120,
                                      test_gaps=gaps)
    bundle = convert_planetoid(files, "citeseer")
    assert bundle.graph.num_nodes == 3327
    assert bundle.split.test.size == 1000
    for g in gaps:
        assert g not in ref["test_idx"]
        np.testing.assert_array_equal(bundle.features[g], 0.0)
        assert bundle.labels[g] == 0  # argmax of an all-zero label row
        for part in (bundle.split.train, bundle.split.val,
                     bundle.split.test):
            assert g not in part


def test_convert_planetoid_error_paths():
    files, _ = _synthetic_planetoid("cora", 2708, 5278, 1433, 7,
                                    n_test=1000, n_train=140)
    missing = dict(files)
    del missing["graph"]
    with pytest.raises(DataFormatError, match="ind.cora.graph.*missing"):
        convert_planetoid(missing, "cora")
    bad_index = dict(files)
    bad_index["test.index"] = b"12 zap"
    with pytest.raises(DataFormatError, match="test.index"):
        convert_planetoid(bad_index, "cora")
    bad_pickle = dict(files)
    bad_pickle["ty"] = b"\x00garbage"
    with pytest.raises(DataFormatError, match="cannot unpickle"):
        convert_planetoid(bad_pickle, "cora")


def test_convert_planetoid_rejects_wrong_counts():
    files, _ = _synthetic_planetoid("cora", 2708, 5000, 1433, 7,
                                    n_test=1000, n_train=140)
    with pytest.raises(DataFormatError,
                       match="num_edge_records: expected 5278, got 5000"):
        convert_planetoid(files, "cora")


# ------------------------------------------------------------------ npz


def _npz_bytes(arrays):
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    return buf.getvalue()


def _synthetic_npz(n, records, f, c, seed=0, dense_attr=False):
    rng = np.random.default_rng(seed)
    lo, hi = _unique_pairs(n, records, rng)
    adj = sp.coo_matrix((np.ones(records), (lo, hi)),
                        shape=(n, n)).tocsr()
    attr = sp.random(n, f, density=0.2, format="csr", random_state=seed)
    arrays = {"adj_data": adj.data, "adj_indices": adj.indices,
              "adj_indptr": adj.indptr, "adj_shape": np.array(adj.shape),
              "labels": rng.integers(0, c, size=n)}
    if dense_attr:
        arrays["attr_matrix"] = attr.toarray()
    else:
        arrays.update({"attr_data": attr.data,
                       "attr_indices": attr.indices,
                       "attr_indptr": attr.indptr,
                       "attr_shape": np.array(attr.shape)})
    # labels must cover every class for max()+1 to equal c
    arrays["labels"][:c] = np.arange(c)
    return _npz_bytes(arrays), attr.toarray()


def test_convert_npz_sparse_and_dense_attributes(monkeypatch):
    monkeypatch.setitem(data_io.DATASETS["amazon-photo"], "expect",
                        (30, 40, 5, 4))
    for dense in (False, True):
        data, attr = _synthetic_npz(30, 40, 5, 4, dense_attr=dense)
        bundle = convert_npz_bundle(data, "amazon-photo")
        assert bundle.graph.num_nodes == 30
        assert bundle.num_edge_records == 40
        assert bundle.features.dtype == np.float32
        np.testing.assert_allclose(bundle.features, attr, atol=1e-6)
        assert bundle.num_classes == 4
        assert bundle.undirected and bundle.split is None


def test_convert_npz_error_paths(monkeypatch):
    with pytest.raises(DataFormatError, match="cannot read archive"):
        convert_npz_bundle(b"not an archive", "amazon-photo")
    data, _ = _synthetic_npz(30, 40, 5, 4)
    blob = dict(np.load(io.BytesIO(data)))
    del blob["adj_indices"]
    with pytest.raises(DataFormatError, match="missing array"):
        convert_npz_bundle(_npz_bytes(blob), "amazon-photo")
    monkeypatch.setitem(data_io.DATASETS["amazon-photo"], "expect",
                        (30, 99, 5, 4))
    with pytest.raises(DataFormatError, match="expected 99, got 40"):
        convert_npz_bundle(data, "amazon-photo")


# ------------------------------------------------------------------ ogb


def _synthetic_arxiv_zip(n=6, f=3, c=2, seed=0):
    rng = np.random.default_rng(seed)
    edges = np.array([[0, 1], [1, 2], [2, 0], [3, 4], [4, 5], [5, 3],
                      [1, 0]])
    feats = rng.normal(size=(n, f)).round(4)
    labels = np.concatenate([np.arange(c), rng.integers(0, c, size=n - c)])
    members = {
        "arxiv/raw/edge.csv.gz": edges,
        "arxiv/raw/node-feat.csv.gz": feats,
        "arxiv/raw/node-label.csv.gz": labels[:, None],
        "arxiv/split/time/train.csv.gz": np.array([[0], [1]]),
        "arxiv/split/time/valid.csv.gz": np.array([[2], [3]]),
        "arxiv/split/time/test.csv.gz": np.array([[4], [5]]),
    }
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for name, arr in members.items():
            csv = "\n".join(",".join(str(v) for v in np.atleast_1d(row))
                            for row in arr).encode()
            zf.writestr(name, gzip.compress(csv))
    return buf.getvalue(), edges, feats, labels


def test_convert_ogb_arxiv(monkeypatch):
    data, edges, feats, labels = _synthetic_arxiv_zip()
    monkeypatch.setitem(data_io.DATASETS["ogbn-arxiv"], "expect",
                        (6, 7, 3, 2))
    bundle = convert_ogb_arxiv(data)
    assert not bundle.undirected
    assert bundle.graph.num_edges == 7
    np.testing.assert_allclose(bundle.features, feats, atol=1e-6)
    np.testing.assert_array_equal(bundle.labels, labels)
    np.testing.assert_array_equal(bundle.split.train, [0, 1])
    np.testing.assert_array_equal(bundle.split.test, [4, 5])


def test_convert_ogb_arxiv_error_paths(monkeypatch):
    with pytest.raises(DataFormatError, match="zip"):
        convert_ogb_arxiv(b"PKnot really")
    data, *_ = _synthetic_arxiv_zip()
    buf = io.BytesIO()
    with zipfile.ZipFile(io.BytesIO(data)) as src, \
            zipfile.ZipFile(buf, "w") as dst:
        for member in src.namelist():
            if not member.endswith("edge.csv.gz"):
                dst.writestr(member, src.read(member))
    with pytest.raises(DataFormatError, match="no member ends with"):
        convert_ogb_arxiv(buf.getvalue())
    # count gate uses the published statistics
    with pytest.raises(DataFormatError, match="expected 169343"):
        convert_ogb_arxiv(data)


# ---------------------------------------------------------------- fetch


class _FakeServer:
    def __init__(self, blobs):
        self.blobs = blobs
        self.calls = []

    def __call__(self, url):
        self.calls.append(url)
        name = url.rsplit("/", 1)[1]
        if name not in self.blobs:
            raise FetchError(f"GET {url}: HTTP 404", retryable=False)
        return self.blobs[name]


@pytest.fixture(scope="module")
def cora_server():
    files, _ = _synthetic_planetoid("cora", 2708, 5278, 1433, 7,
                                    n_test=1000, n_train=140)
    return _FakeServer({f"ind.cora.{tag}": blob
                        for tag, blob in files.items()})


def test_fetch_downloads_once_then_hits_cache(tmp_path, cora_server):
    cora_server.calls.clear()
    target = fetch_dataset("cora", cache_dir=tmp_path,
                           http_get=cora_server)
    assert target == tmp_path / "cora"
    assert len(cora_server.calls) == 8
    bundle = load_dataset(target)
    assert bundle.graph.num_nodes == 2708
    assert len(bundle.source_urls) == 8
    digest = data_io._sha256_hex(cora_server.blobs["ind.cora.y"])
    assert bundle.source_checksums["ind.cora.y"] == digest

    fetch_dataset("cora", cache_dir=tmp_path, http_get=cora_server)
    assert len(cora_server.calls) == 8  # cache hit, no new requests
    fetch_dataset("cora", cache_dir=tmp_path, http_get=cora_server,
                  force=True)
    assert len(cora_server.calls) == 16


def test_fetch_rejects_pin_mismatch(tmp_path, cora_server, monkeypatch):
    monkeypatch.setitem(data_io.PINNED_SOURCE_SHA256, "ind.cora.allx",
                        "0" * 64)
    with pytest.raises(FetchError, match="does not match pin"):
        fetch_dataset("cora", cache_dir=tmp_path, http_get=cora_server)


def test_fetch_unknown_dataset_lists_names(tmp_path):
    with pytest.raises(InputError, match="cora.*pubmed"):
        fetch_dataset("corra", cache_dir=tmp_path, http_get=lambda u: b"")


def test_dataset_registry():
    assert sorted(data_io.DATASETS) == [
        "amazon-computers", "amazon-photo", "citeseer", "coauthor-cs",
        "coauthor-physics", "cora", "ogbn-arxiv", "pubmed"]
    for name in data_io.DATASETS:
        urls = data_io.dataset_urls(name)
        assert all(u.startswith("https://") for u in urls.values())


def test_default_cache_dir_env_override(monkeypatch):
    monkeypatch.setenv("GRAPHEM_CACHE", "/tmp/somewhere")
    assert default_cache_dir() == Path("/tmp/somewhere")
    monkeypatch.delenv("GRAPHEM_CACHE")
    assert default_cache_dir() == Path("~/.cache/graphem").expanduser()


# ----------------------------------------------------------- generators


def test_make_semi_split_counts_and_determinism():
    labels = np.random.default_rng(0).integers(0, 4, size=400)
    spec = SplitSpec(per_class=10, val_size=50, test_size=80)
    s1 = make_semi_split(labels, spec, np.random.default_rng(7))
    s2 = make_semi_split(labels, spec, np.random.default_rng(7))
    s3 = make_semi_split(labels, spec, np.random.default_rng(8))
    assert s1.train.size == 40 and s1.val.size == 50 and s1.test.size == 80
    for c in range(4):
        assert np.count_nonzero(labels[s1.train] == c) == 10
    np.testing.assert_array_equal(s1.train, s2.train)
    np.testing.assert_array_equal(s1.test, s2.test)
    assert not np.array_equal(s1.test, s3.test)


def test_make_semi_split_errors():
    labels = np.array([0] * 30 + [1] * 3)
    with pytest.raises(InputError, match="class 1 has 3"):
        make_semi_split(labels, SplitSpec(per_class=5, val_size=2,
                                          test_size=2),
                        np.random.default_rng(0))
    with pytest.raises(InputError, match="cannot host"):
        make_semi_split(labels, SplitSpec(per_class=3, val_size=20,
                                          test_size=20),
                        np.random.default_rng(0))


class _FirstChoice:
    """Stand-in rng whose choice takes the first ``size`` entries."""

    def choice(self, arr, size, replace=False):
        return np.asarray(arr)[:size]


def test_make_hop_split_path_graph_oracle():
    n = 12
    graph = Graph(n, np.arange(n - 1), np.arange(1, n),
                  undirected_input=True)
    labels = np.zeros(n, dtype=np.int64)
    with pytest.warns(UserWarning):  # val consumes the distance-1 node
        split, groups = make_hop_split(graph, labels, _FirstChoice(),
                                       per_class=1, val_size=1,
                                       group_size=1)
    np.testing.assert_array_equal(split.train, [0])
    np.testing.assert_array_equal(split.val, [1])
    # node k sits k hops down the path; node 1 was consumed by val
    assert sorted(groups) == list(range(2, n))
    for d, members in groups.items():
        np.testing.assert_array_equal(members, [d])


def test_make_hop_split_drops_small_groups_with_warning():
    n = 12
    graph = Graph(n, np.arange(n - 1), np.arange(1, n),
                  undirected_input=True)
    labels = np.zeros(n, dtype=np.int64)
    with pytest.warns(UserWarning, match="distance-1 group"):
        _, groups = make_hop_split(graph, labels, _FirstChoice(),
                                   per_class=1, val_size=1, group_size=1)
    assert 1 not in groups
    with pytest.raises(InputError, match="no distance group"):
        with pytest.warns(UserWarning):
            make_hop_split(graph, labels, _FirstChoice(), per_class=1,
                           val_size=1, group_size=5)


def test_make_hop_split_matches_bfs_on_random_graph():
    graph, _, labels = generate_sbm(200, 4, 0.05, 0.004, 4, 1.0, seed=1)
    rng = np.random.default_rng(2)
    split, groups = make_hop_split(graph, labels, rng, per_class=5,
                                   val_size=20, group_size=5)
    dist = bfs_distance_groups(graph, split.train)
    for d, members in groups.items():
        assert d >= 1
        np.testing.assert_array_equal(dist[members], d)
        assert np.intersect1d(members, split.val).size == 0
    np.testing.assert_array_equal(
        split.test, np.sort(np.concatenate(list(groups.values()))))


def test_make_rate_split_arithmetic():
    rng = np.random.default_rng(0)
    labels = np.zeros(100)
    s = make_rate_split(labels, 50.0, rng)
    assert s.train.size == 50 and s.val.size == 25 and s.test.size == 25
    s = make_rate_split(np.zeros(10), 15.0, np.random.default_rng(1))
    assert s.train.size == 1 and s.val.size == 4 and s.test.size == 5
    both = np.concatenate([s.train, s.val, s.test])
    assert np.array_equal(np.sort(both), np.arange(10))
    with pytest.raises(InputError, match="rate must sit"):
        make_rate_split(labels, 0.0, rng)
    with pytest.raises(InputError, match="rounds to zero"):
        make_rate_split(np.zeros(10), 5.0, rng)


# ----------------------------------------------------------------- hash


def test_content_hash_order_invariant_and_sensitive(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for root, order in ((a, ("x.txt", "sub/y.bin")),
                        (b, ("sub/y.bin", "x.txt"))):
        (root / "sub").mkdir(parents=True)
        for name in order:
            payload = b"alpha" if name.endswith(".txt") else b"\x01\x02"
            (root / name).write_bytes(payload)
    assert content_hash(a) == content_hash(b)
    (b / "x.txt").write_bytes(b"alphb")
    assert content_hash(a) != content_hash(b)
    (b / "x.txt").write_bytes(b"alpha")
    (b / "x.txt").rename(b / "z.txt")
    assert content_hash(a) != content_hash(b)
