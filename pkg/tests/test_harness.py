import math
from dataclasses import replace

import pytest

from hiervc.codec import CodecConfig
from hiervc.harness import (
    NO_INFO_FLAG,
    ExperimentReport,
    align_base_step,
    corpus_specs,
    encode,
    layer_means,
    recovery_window,
    run_no_information_test,
    run_quality_structure_report,
    run_rd_sweep,
    synthetic_corpus,
)
from hiervc.metrics import bd_rate
from hiervc.structure import StructureConfig
from hiervc.synth import SyntheticSpec, gen_synthetic

STEPS = [8.0, 12.0, 16.0, 24.0, 32.0]


@pytest.fixture(scope="module")
def seq33():
    return synthetic_corpus(1)[0]


def test_corpus_is_balanced():
    specs = corpus_specs(16)
    assert len({s.seed for s in specs}) == 16
    for sigma in {s.noise_sigma for s in specs}:
        assert sorted(s.phase for s in specs if s.noise_sigma == sigma) == [0, 1, 2, 3]
    assert [s.phase for s in corpus_specs(20)].count(0) == 5


def test_report_csv_round_trip(seq33):
    rep = ExperimentReport.from_encode("x", encode(seq33, CodecConfig()))
    rep.summary["label"] = "text"
    rep.rows[3].flag = NO_INFO_FLAG
    text = rep.to_csv()
    assert text.splitlines()[0] == "kind,index,type,layer,omega,bits,psnr,flag,name,value"
    assert "\r" not in text
    back = ExperimentReport.from_csv(text)
    assert back == rep
    assert len(back.rows) == len(seq33)
    with pytest.raises(ValueError):
        ExperimentReport.from_csv("a,b\n1,2\n")


def test_rd_sweep_static_sequence(tmp_path):
    static = gen_synthetic(SyntheticSpec(seed=2, n_frames=9, noise_sigma=0, motion=(0, 0)))
    curve, reports = run_rd_sweep(static, [4, 8, 16, 32, 64], CodecConfig(), out_dir=tmp_path)
    bpps = [r.summary["bpp"] for r in reports]
    assert all(a > b for a, b in zip(bpps, bpps[1:]))
    assert len(list(tmp_path.glob("*.csv"))) == 5
    again, _ = run_rd_sweep(static, [4, 8, 16, 32, 64], CodecConfig())
    assert again == curve
    assert bd_rate(curve, again) == pytest.approx(0.0, abs=1e-9)


def test_rd_sweep_anchor_and_errors(seq33):
    short = gen_synthetic(SyntheticSpec(seed=1, n_frames=5))
    anchor, _ = run_rd_sweep(short, STEPS, CodecConfig(lookahead_enabled=False))
    _, reports = run_rd_sweep(short, STEPS, CodecConfig(), anchor=("off", anchor))
    assert all(math.isfinite(r.summary["bd_rate_vs_off"]) for r in reports)
    with pytest.raises(ValueError):
        run_rd_sweep(short, STEPS[:3], CodecConfig())


def test_no_information_test(seq33):
    frames_before = [f.luma.copy() for f in seq33]
    multi = run_no_information_test(seq33, 10, CodecConfig())
    single = run_no_information_test(seq33, 10, CodecConfig(multi_reference=False))
    assert [f.luma.tobytes() for f in seq33] == [f.tobytes() for f in frames_before]
    assert multi.rows[10].flag == NO_INFO_FLAG
    assert sum(r.flag == NO_INFO_FLAG for r in multi.rows) == 1
    assert multi.summary["recovery_first"] == 12 and multi.summary["recovery_last"] == 18
    assert multi.summary["recovery_gap_db"] <= 0.5
    assert multi.summary["recovery_mean_psnr"] >= single.summary["recovery_mean_psnr"] + 0.5
    back = ExperimentReport.from_csv(multi.to_csv())
    assert back.summary == multi.summary


def test_no_information_test_errors(seq33):
    with pytest.raises(ValueError):
        run_no_information_test(seq33, 0)
    with pytest.raises(ValueError):
        run_no_information_test(seq33, 40)
    cfg = CodecConfig(structure=StructureConfig(1, intra_period=8))
    with pytest.raises(ValueError):
        run_no_information_test(seq33, 16, cfg)
    short = gen_synthetic(SyntheticSpec(seed=1, n_frames=12))
    rep = run_no_information_test(short, 10)
    assert "note" in rep.summary
    assert list(recovery_window(10, 33)) == list(range(12, 19))


def test_quality_report_orders_layers():
    seq = synthetic_corpus(1, n_frames=65)[0]
    rep = run_quality_structure_report(seq)
    s = rep.summary
    assert s["mean_psnr_key"] > s["mean_psnr_high"] and s["mean_psnr_key"] > s["mean_psnr_low"]
    assert len(rep.rows) == 65


def test_quality_report_two_frames():
    seq = gen_synthetic(SyntheticSpec(seed=1, n_frames=2))
    rep = run_quality_structure_report(seq)
    assert rep.summary["ordering"] == "skipped" and "note" in rep.summary


@pytest.mark.slow
def test_equal_weights_control():
    cfg = CodecConfig(structure=StructureConfig(1, weights=(1, 1, 1, 1)))
    rows = []
    for seq in synthetic_corpus(8, n_frames=65):
        rows += run_quality_structure_report(seq, cfg).rows
    means = layer_means(rows)
    assert max(means.values()) - min(means.values()) <= 0.3


def test_align_base_step(seq33):
    short = replace(seq33, frames=seq33.frames[:9])
    step, res = align_base_step(short, CodecConfig(), 0.3)
    assert abs(res.bpp / 0.3 - 1) <= 0.05
    with pytest.raises(ValueError):
        align_base_step(short, CodecConfig(), 0)

