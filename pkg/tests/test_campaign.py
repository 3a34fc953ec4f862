import io
import os

import pytest

from spantree import (
    CampaignConfig,
    campaign_csv,
    derive_seed,
    generate_degree_skewed,
    graph_from_spec,
    parse_campaign_config,
    report_table1,
    run_campaign,
)
from spantree.campaign import CSV_COLUMNS
from spantree.cli import main as cli_main


SMALL_CONFIG = """
# comment line
graph = er(60,130)
protocols = attested,baseline
behaviors = cheat,disturb
attack_edges = 2,3
runs = 3
master_seed = 11
analytic_only = true
timestamp_header = false
"""


class TestConfigParsing:
    def test_round_trip(self):
        cfg = parse_campaign_config(SMALL_CONFIG)
        assert cfg.graph_spec == "er(60,130)"
        assert cfg.protocols == ("attested", "baseline")
        assert cfg.behaviors == ("cheat", "disturb")
        assert cfg.attack_edges == (2, 3)
        assert cfg.runs == 3
        assert cfg.analytic_only
        assert not cfg.timestamp_header
        assert cfg.master_seed == 11

    def test_defaults(self):
        cfg = parse_campaign_config("graph = er(30,60)")
        assert cfg.runs == 100
        assert cfg.analytic_only
        assert cfg.timestamp_header

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            parse_campaign_config("graph = er(30,60)\nbogus = 1")

    def test_missing_graph_rejected(self):
        with pytest.raises(ValueError, match="graph"):
            parse_campaign_config("runs = 5")

    def test_bad_values_rejected(self):
        with pytest.raises(ValueError):
            parse_campaign_config("graph = er(30,60)\nanalytic_only = perhaps")
        with pytest.raises(ValueError):
            parse_campaign_config("graph = er(30,60)\nbehaviors = sneaky")
        with pytest.raises(ValueError):
            parse_campaign_config("graph = er(30,60)\nruns = 0")


class TestGraphSpecs:
    def test_er_spec(self):
        g = graph_from_spec("er(50,100)", master_seed=3)
        assert g.n <= 50
        assert graph_from_spec("er(50,100)", master_seed=3) == g

    def test_file_and_randomized_specs(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("0 1\n1 2\n2 3\n3 0\n0 2\n")
        g = graph_from_spec(f"file:{path}")
        assert g.n == 4 and g.edge_count == 5
        shuffled = graph_from_spec(f"randomized({path})", master_seed=4)
        assert sorted(shuffled.degrees.tolist()) == sorted(g.degrees.tolist())

    def test_degree_skewed_generator(self):
        g = generate_degree_skewed(80, 2, seed=6)
        assert g.n == 80
        assert g.degrees.max() > 6  # hubs emerge
        assert generate_degree_skewed(80, 2, seed=6) == g


class TestRunCampaign:
    def test_row_counting_contract(self):
        cfg = parse_campaign_config(SMALL_CONFIG)
        rows = run_campaign(cfg)
        # 2 protocols x 2 behaviors x 2 budgets = 8 cells, each 3 runs + MEAN + CI99
        assert len(rows) == 8 * (3 + 2)
        run_rows = [r for r in rows if isinstance(r["run_index"], int)]
        assert len(run_rows) == 24
        assert {r["run_index"] for r in rows} - set(range(3)) == {"MEAN", "CI99"}

    def test_summary_mean_matches_rows(self):
        cfg = parse_campaign_config(SMALL_CONFIG)
        rows = run_campaign(cfg)
        cells = {}
        for r in rows:
            cells.setdefault((r["protocol"], r["behavior"], r["g"]), []).append(r)
        for cell_rows in cells.values():
            runs = [r for r in cell_rows if isinstance(r["run_index"], int)]
            mean_row = next(r for r in cell_rows if r["run_index"] == "MEAN")
            expected = sum(r["rln_analytic"] for r in runs) / len(runs)
            assert mean_row["rln_analytic"] == pytest.approx(expected)

    def test_protocols_share_placements(self):
        cfg = parse_campaign_config(SMALL_CONFIG)
        rows = [r for r in run_campaign(cfg) if isinstance(r["run_index"], int)]
        by_key = {}
        for r in rows:
            by_key.setdefault((r["behavior"], r["g"], r["run_index"]), []).append(r)
        for group in by_key.values():
            assert len({r["root"] for r in group}) == 1
            assert len({r["seed"] for r in group}) == 1

    def test_simulated_column_populated_when_not_analytic(self):
        cfg = CampaignConfig(
            graph_spec="er(40,90)", protocols=("attested",), behaviors=("cheat",),
            attack_edges=(2,), runs=2, master_seed=5, analytic_only=False,
            timestamp_header=False,
        )
        rows = [r for r in run_campaign(cfg) if isinstance(r["run_index"], int)]
        for r in rows:
            assert r["rln_simulated"] is not None
            assert r["rln_simulated"] <= r["rln_analytic"] + 1e-9

    def test_csv_columns_fixed_order(self):
        cfg = parse_campaign_config(SMALL_CONFIG)
        text = campaign_csv(cfg)
        header = text.splitlines()[0]
        assert header == ",".join(CSV_COLUMNS)

    def test_unusable_instance_fails_after_bounded_retries(self, tmp_path):
        # two components with the adversary attachable to one side only:
        # no root can reach every honest node, so the run must error out
        path = tmp_path / "split.txt"
        path.write_text("0 1\n2 3\n")
        cfg = CampaignConfig(
            graph_spec=f"file:{path}", protocols=("attested",),
            behaviors=("cheat",), attack_edges=(1,), runs=1,
            master_seed=5, lcc=False, timestamp_header=False,
        )
        with pytest.raises(ValueError, match="root"):
            run_campaign(cfg)


class TestReportTable1:
    def test_triangle_metrics(self, tmp_path):
        path = tmp_path / "tri.txt"
        path.write_text("0 1\n1 2\n0 2\n")
        m = report_table1(f"file:{path}")
        assert (m.node_count, m.edge_count) == (3, 3)
        assert m.characteristic_path_length == 1.0
        assert m.clustering_coefficient == 1.0


class TestDeriveSeed:
    def test_stable_values(self):
        assert derive_seed(1, "a") == derive_seed(1, "a")
        assert derive_seed(1, "a") != derive_seed(1, "b")
        assert derive_seed(1, 2) != derive_seed(12)
        assert 0 <= derive_seed("x") < 2**64


class TestConsistencyOracle:
    def test_clean_on_correct_implementation(self):
        from spantree import consistency_check

        rep = consistency_check(instances=6, master_seed=7)
        assert rep.instances == 6
        assert rep.violations == []

    def test_detects_broken_expiry(self, monkeypatch):
        # sabotage the freshness rule; replayed stale chains must be flagged
        from spantree import consistency_check
        from spantree.attestation import LevelAttestation

        monkeypatch.setattr(LevelAttestation, "expiry_base",
                            lambda self, step: 10**12)
        rep = consistency_check(instances=8, master_seed=7)
        assert rep.violations
        assert "stale chain" in rep.violations[0]


class TestCli:
    def test_campaign_subcommand(self, tmp_path, capsys):
        cfg_path = tmp_path / "c.cfg"
        out_path = tmp_path / "out.csv"
        cfg_path.write_text(
            "graph = er(40,80)\nprotocols = attested\nbehaviors = disturb\n"
            f"attack_edges = 2\nruns = 2\nmaster_seed = 3\noutput = {out_path}\n"
            "timestamp_header = false\n"
        )
        assert cli_main(["campaign", str(cfg_path)]) == 0
        text = out_path.read_text()
        assert text.splitlines()[0] == ",".join(CSV_COLUMNS)

    def test_metrics_subcommand(self, tmp_path, capsys):
        path = tmp_path / "tri.txt"
        path.write_text("0 1\n1 2\n0 2\n")
        assert cli_main(["metrics", str(path)]) == 0
        out = capsys.readouterr().out
        assert "nodes:    3" in out
        assert "cpl:      1.0000" in out

    def test_oracle_check_subcommand(self, capsys):
        assert cli_main(["oracle-check", "--instances", "3", "--seed", "5"]) == 0
        out = capsys.readouterr().out
        assert "instances checked: 3" in out
        assert "match the analytic predictions" in out

    def test_oracle_check_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "oracle.cfg"
        cfg.write_text("instances = 2\nmaster_seed = 9\n")
        assert cli_main(["oracle-check", str(cfg)]) == 0
        assert "instances checked: 2" in capsys.readouterr().out

    def test_error_exit_code(self, capsys):
        assert cli_main(["campaign", "/nonexistent/file.cfg"]) == 2
