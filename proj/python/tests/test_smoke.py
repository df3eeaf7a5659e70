import json

import pytest

import wenas


def test_space_size_matches_enumeration():
    assert [wenas.search_space_size(n) for n in (2, 3, 4)] == [4, 32, 384]
    assert len(wenas.enumerate_genomes(3)) == 32
    assert wenas.search_space_size(8) == 82575360


def test_genome_round_trip():
    g = wenas.Genome(5, [wenas.NodeGene(0, "relu"), wenas.NodeGene(1, "relu"),
                         wenas.NodeGene(2, "tanh"), wenas.NodeGene(1, "relu")])
    assert repr(g) == "[('relu', 0), ('relu', 1), ('tanh', 2), ('relu', 1)]"
    assert wenas.Genome.from_json(g.to_json()) == g
    assert g.validate() == []


def test_bad_genomes_raise():
    with pytest.raises(ValueError):
        wenas.NodeGene(0, "gelu")
    with pytest.raises(ValueError):
        wenas.Genome.from_json('{"version":1,"levels":3,"nodes":[{"ancestor":2,"op":"relu"}]}')


def test_pool_is_seeded_and_distinct():
    a = wenas.random_pool(20, 6, seed=3)
    assert a == wenas.random_pool(20, 6, seed=3)
    assert len({x.to_json() for x in a}) == 20


def test_tiny_search_report():
    words = " ".join("abcdefg"[(i * i) % 7] for i in range(600))
    cfg = wenas.SearchConfig()
    cfg.total_networks, cfg.net_batch, cfg.seed_size = 4, 2, 1
    cfg.epochs_per_round, cfg.levels, cfg.hidden_dim = 1, 3, 8
    cfg.batch_size, cfg.bptt = 4, 8
    report = json.loads(wenas.search(words, cfg))
    assert report["total_rounds"] == 2
    for r in report["rounds"]:
        assert abs(sum(r["weights"]) - 1.0) < 1e-6


def test_cli_generate():
    code, out, _ = wenas.run_cli(["generate", "--levels", "2", "--count", "4", "--out", "-"])
    assert code == 0
    assert len(out.splitlines()) == 4
    code, _, err = wenas.run_cli(["generate", "--levels", "2", "--count", "5", "--out", "-"])
    assert code == 2 and "error" in err
