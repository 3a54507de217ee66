from pathlib import Path

import numpy as np
import pytest

from plotkit.cli import main
from plotkit.render import MASKED_COLOR, PlotSpec, render
from plotkit.schema import load_bound_map

DATA = Path(__file__).parent / "data"

REFERENCE_INPUTS = {
    "position_map": "case2_pcmfsk_like.csv",
    "doppler_map": "case2_pcmfsk_like.csv",
    "ratio_map": "ratio_position_pcmfsk_like.csv",
    "wbaf": "wbaf_pcmfsk_like.csv",
}


@pytest.mark.parametrize("kind", sorted(REFERENCE_INPUTS))
def test_render_all_kinds_from_reference_sweep(kind, tmp_path):
    out = tmp_path / f"{kind}.png"
    result = render(PlotSpec(input_csv=str(DATA / REFERENCE_INPUTS[kind]),
                             kind=kind, output=str(out)))
    assert out.exists() and out.stat().st_size > 0
    assert result.grid.values.shape[0] > 0
    print(f"ACCEPTANCE plotkit render {kind}: PASS ({out.stat().st_size} bytes)")


def test_rendered_data_equals_csv(tmp_path):
    path = DATA / "case2_pcmfsk_like.csv"
    result = render(PlotSpec(input_csv=str(path), kind="position_map",
                             output=str(tmp_path / "m.png")))
    reread = load_bound_map(path, "position")
    assert np.array_equal(result.grid.values.mask, reread.values.mask)
    assert np.array_equal(result.grid.values.compressed(),
                          reread.values.compressed())


def test_masked_cells_render_distinctly(tmp_path):
    # The singular cells must use the reserved gray, not a colormap value.
    import matplotlib.pyplot as plt
    from matplotlib.colors import to_rgba

    from plotkit.render import _draw_map

    grid = load_bound_map(DATA / "case2_pcmfsk_like.csv", "position")
    assert grid.values.mask.any()
    fig, ax = plt.subplots()
    mesh = _draw_map(ax, grid, scale="linear")
    bad = mesh.get_cmap().get_bad()
    assert tuple(np.round(bad, 3)) == tuple(np.round(to_rgba(MASKED_COLOR), 3))
    in_map = [mesh.get_cmap()(v) for v in np.linspace(0, 1, 32)]
    assert all(tuple(bad) != tuple(np.asarray(c)) for c in in_map)
    plt.close(fig)


def test_ratio_colorbar_clamped_at_one(tmp_path):
    import matplotlib.pyplot as plt

    from plotkit.render import _draw_map
    from plotkit.schema import load_ratio_map

    grid = load_ratio_map(DATA / "ratio_position_pcmfsk_like.csv")
    fig, ax = plt.subplots()
    mesh = _draw_map(ax, grid, scale="linear", vmin=1.0)
    assert mesh.norm.vmin == 1.0
    plt.close(fig)


def test_single_cell_grid_renders(tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("x_m,y_m,sqrt_crlb_p_m,sqrt_crlb_eta,flag\n"
                    "0.0,1000.0,12.5,3.2e-06,\n")
    out = tmp_path / "one.png"
    result = render(PlotSpec(input_csv=str(path), kind="position_map",
                             output=str(out)))
    assert out.exists()
    assert result.grid.values.shape == (1, 1)


def test_render_is_deterministic(tmp_path):
    spec_a = PlotSpec(input_csv=str(DATA / "case3_pcmfsk_like.csv"),
                      kind="position_map", output=str(tmp_path / "a.png"))
    spec_b = PlotSpec(input_csv=str(DATA / "case3_pcmfsk_like.csv"),
                      kind="position_map", output=str(tmp_path / "b.png"))
    render(spec_a)
    render(spec_b)
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()


def test_render_never_mutates_input(tmp_path):
    src = (DATA / "case1.csv").read_bytes()
    render(PlotSpec(input_csv=str(DATA / "case1.csv"), kind="position_map",
                    output=str(tmp_path / "c.png")))
    assert (DATA / "case1.csv").read_bytes() == src


def test_log_scale_render(tmp_path):
    out = tmp_path / "log.png"
    render(PlotSpec(input_csv=str(DATA / "case2_pcmfsk_like.csv"),
                    kind="position_map", output=str(out), scale="log"))
    assert out.exists()


def test_cli_roundtrip(tmp_path, capsys):
    out = tmp_path / "cli.png"
    code = main(["--in", str(DATA / "case2_pcmfsk_like.csv"),
                 "--kind", "doppler_map", "--out", str(out)])
    assert code == 0 and out.exists()
    assert "wrote" in capsys.readouterr().out


def test_cli_schema_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n")
    code = main(["--in", str(bad), "--kind", "position_map",
                 "--out", str(tmp_path / "x.png")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_spec_validation():
    with pytest.raises(ValueError):
        PlotSpec(input_csv="x.csv", kind="sideways_map", output="x.png")
    with pytest.raises(ValueError):
        PlotSpec(input_csv="x.csv", kind="wbaf", output="x.png", scale="dB")
