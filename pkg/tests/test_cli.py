import json

import numpy as np
import pytest

from sadis.cli import main
from sadis.imageops import grayscale
from sadis.regwct import RegWctConfig, channel_moments, wct
from sadis.tensorio import (
    LatentTensor,
    RgbImage,
    quantize_u8,
    read_image,
    read_npy,
    write_image,
    write_npy,
)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def latents(tmp_path, rng):
    z = rng.standard_normal((4, 8, 8))
    ref = rng.standard_normal((4, 8, 8)) * 2.0 + 0.5
    zp, rp = tmp_path / "z.npy", tmp_path / "ref.npy"
    write_npy(zp, z, precision="f64")
    write_npy(rp, ref, precision="f64")
    return zp, rp


class TestEmbedCommands:
    def test_color_extract_equal_inputs_zero(self, tmp_path, capsys, rng):
        e = rng.standard_normal((4, 8))
        a, out = tmp_path / "a.npy", tmp_path / "out.npy"
        write_npy(a, e, precision="f64")
        code, stdout, _ = run(
            capsys, "embed", "color-extract", "--color", a, "--gray", a, "--out", out
        )
        assert code == 0
        np.testing.assert_array_equal(read_npy(out), 0.0)
        assert json.loads(stdout)["shape"] == [4, 8]

    def test_texture_extract_identity(self, tmp_path, capsys, rng):
        g = rng.standard_normal((6, 10))
        a = rng.standard_normal((6, 10))
        gp, ap, out = tmp_path / "g.npy", tmp_path / "a.npy", tmp_path / "t.npy"
        write_npy(gp, g, precision="f64")
        write_npy(ap, a, precision="f64")
        code, _, _ = run(
            capsys, "embed", "texture-extract", "--gray-texture", gp, "--avg-gray", ap,
            "--out", out, "--gamma", 0, "--beta", 1, "--precision", "f64",
        )
        assert code == 0
        got = read_npy(out)
        assert np.linalg.norm(got - g) / np.linalg.norm(g) < 1e-8

    def test_combine_shapes(self, tmp_path, capsys, rng):
        t = rng.standard_normal((4, 8))
        c = rng.standard_normal((4, 8))
        tp, cp, out = tmp_path / "t.npy", tmp_path / "c.npy", tmp_path / "o.npy"
        write_npy(tp, t, precision="f64")
        write_npy(cp, c, precision="f64")
        code, stdout, _ = run(
            capsys, "embed", "combine", "--texture", tp, "--color", cp, "--out", out
        )
        assert code == 0
        assert read_npy(out).shape == (8, 8)

    def test_shape_mismatch_exit_2(self, tmp_path, capsys, rng):
        a, b = tmp_path / "a.npy", tmp_path / "b.npy"
        write_npy(a, rng.standard_normal((3, 5)))
        write_npy(b, rng.standard_normal((4, 5)))
        code, _, stderr = run(
            capsys, "embed", "color-extract", "--color", a, "--gray", b,
            "--out", tmp_path / "o.npy",
        )
        assert code == 2
        assert "error" in stderr

    def test_missing_file_exit_3(self, tmp_path, capsys):
        code, _, stderr = run(
            capsys, "embed", "combine", "--texture", tmp_path / "no.npy",
            "--color", tmp_path / "no.npy", "--out", tmp_path / "o.npy",
        )
        assert code == 3


class TestImageCommands:
    def test_gs_on_gray_image_is_identity(self, tmp_path, capsys, rng):
        gray_vals = rng.integers(0, 256, (4, 4), dtype=np.uint8)
        px = np.repeat(gray_vals[:, :, None], 3, axis=2) / 255.0
        src, dst = tmp_path / "g.ppm", tmp_path / "o.ppm"
        write_image(src, RgbImage(px))
        code, _, _ = run(capsys, "image", "gs", "--in", src, "--out", dst)
        assert code == 0
        np.testing.assert_array_equal(
            quantize_u8(read_image(dst)), quantize_u8(RgbImage(px))
        )

    def test_avg_makes_uniform(self, tmp_path, capsys, rng):
        src, dst = tmp_path / "a.png", tmp_path / "o.png"
        write_image(src, RgbImage(rng.random((6, 6, 3))))
        code, _, _ = run(capsys, "image", "avg", "--in", src, "--out", dst)
        assert code == 0
        out = read_image(dst).pixels
        assert np.unique(quantize_u8(read_image(dst))).size == 1

    def test_gs_then_avg_on_pure_red(self, tmp_path, capsys):
        # BT.601 oracle: 0.299 quantizes to round(0.299 * 255) = 76
        red = RgbImage(np.broadcast_to([1.0, 0.0, 0.0], (3, 3, 3)))
        src = tmp_path / "red.ppm"
        write_image(src, red)
        mid, dst = tmp_path / "gs.ppm", tmp_path / "avg.ppm"
        assert run(capsys, "image", "gs", "--in", src, "--out", mid)[0] == 0
        assert run(capsys, "image", "avg", "--in", mid, "--out", dst)[0] == 0
        np.testing.assert_array_equal(quantize_u8(read_image(dst)), 76)


class TestWctCommand:
    def test_omega_zero_bitwise_identity(self, tmp_path, capsys, latents):
        zp, rp = latents
        out = tmp_path / "o.npy"
        code, _, _ = run(
            capsys, "wct", "--latent", zp, "--ref", rp, "--omega", 0,
            "--out", out, "--precision", "f64", "--seed", 0,
        )
        assert code == 0
        np.testing.assert_array_equal(read_npy(out), read_npy(zp))

    def test_omega_one_no_noise_self_reference(self, tmp_path, capsys, latents):
        zp, _ = latents
        out = tmp_path / "o.npy"
        code, _, _ = run(
            capsys, "wct", "--latent", zp, "--ref", zp, "--omega", 1, "--no-noise",
            "--out", out, "--precision", "f64",
        )
        assert code == 0
        _, g_in = channel_moments(LatentTensor(read_npy(zp)))
        _, g_out = channel_moments(LatentTensor(read_npy(out)))
        assert np.linalg.norm(g_out - g_in) / np.linalg.norm(g_in) < 1e-5

    def test_gate_closed_bitwise_identity(self, tmp_path, capsys, latents):
        zp, rp = latents
        out = tmp_path / "o.npy"
        code, _, _ = run(
            capsys, "wct", "--latent", zp, "--ref", rp, "--t", 450, "--T", 1000,
            "--out", out, "--precision", "f64", "--seed", 0,
        )
        assert code == 0
        np.testing.assert_array_equal(read_npy(out), read_npy(zp))

    def test_matches_library_wct(self, tmp_path, capsys, latents):
        zp, rp = latents
        out = tmp_path / "o.npy"
        run(
            capsys, "wct", "--latent", zp, "--ref", rp, "--omega", 1, "--no-noise",
            "--out", out, "--precision", "f64",
        )
        expected = wct(
            LatentTensor(read_npy(zp)), LatentTensor(read_npy(rp)), RegWctConfig()
        )
        np.testing.assert_allclose(read_npy(out), expected.data, atol=1e-12)

    def test_unknown_flag_rejected(self, tmp_path, latents, capsys):
        zp, rp = latents
        with pytest.raises(SystemExit) as exc:
            main(["wct", "--latent", str(zp), "--ref", str(rp), "--out",
                  str(tmp_path / "o.npy"), "--bogus"])
        assert exc.value.code == 2


class TestMetricsCommands:
    def test_chist_self_zero(self, tmp_path, capsys, rng):
        p = tmp_path / "a.png"
        write_image(p, RgbImage(rng.random((5, 5, 3))))
        code, stdout, _ = run(capsys, "metrics", "chist", p, p)
        assert code == 0
        assert json.loads(stdout) == {"chist": 0.0}

    def test_swd_bound_and_determinism(self, tmp_path, capsys):
        red = tmp_path / "red.ppm"
        black = tmp_path / "black.ppm"
        write_image(red, RgbImage(np.broadcast_to([1.0, 0.0, 0.0], (4, 4, 3))))
        write_image(black, RgbImage(np.zeros((4, 4, 3))))
        code, out1, _ = run(
            capsys, "metrics", "swd", red, black, "--projections", 1, "--scales", 1,
            "--seed", 5,
        )
        assert code == 0
        value = json.loads(out1)["swd"]
        assert 0.0 <= value <= np.sqrt(3.0)
        _, out2, _ = run(
            capsys, "metrics", "swd", red, black, "--projections", 1, "--scales", 1,
            "--seed", 5,
        )
        assert out1 == out2

    def test_covdist_self_zero(self, tmp_path, capsys, latents):
        zp, _ = latents
        code, stdout, _ = run(capsys, "metrics", "covdist", zp, zp)
        assert code == 0
        assert json.loads(stdout) == {"covdist": 0.0}

    def test_spectrum_writes_csv(self, tmp_path, capsys, rng):
        arr = tmp_path / "z.npy"
        write_npy(arr, rng.standard_normal((8, 8)), precision="f64")
        out = tmp_path / "spec.csv"
        code, stdout, _ = run(capsys, "metrics", "spectrum", arr, "--out", out)
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "radius,power"
        assert len(lines) == json.loads(stdout)["max_radius"] + 2

    def test_default_seed_notice(self, tmp_path, capsys, rng, monkeypatch):
        monkeypatch.delenv("SADIS_SEED", raising=False)
        a = tmp_path / "a.png"
        write_image(a, RgbImage(rng.random((4, 4, 3))))
        code, _, stderr = run(capsys, "metrics", "swd", a, a)
        assert code == 0
        assert "seed 0" in stderr

    def test_env_seed_fallback(self, tmp_path, capsys, rng, monkeypatch):
        monkeypatch.setenv("SADIS_SEED", "7")
        a = tmp_path / "a.png"
        b = tmp_path / "b.png"
        write_image(a, RgbImage(rng.random((4, 4, 3))))
        write_image(b, RgbImage(rng.random((4, 4, 3))))
        _, out_env, stderr = run(capsys, "metrics", "swd", a, b)
        assert "seed 0" not in stderr
        monkeypatch.delenv("SADIS_SEED")
        _, out_explicit, _ = run(capsys, "metrics", "swd", a, b, "--seed", 7)
        assert out_env == out_explicit


class TestHelpDocumentsSymbols:
    @pytest.mark.parametrize(
        "argv,symbols",
        [
            (["wct", "--help"], ["ω", "λ", "T_start", "T_end"]),
            (["embed", "texture-extract", "--help"], ["γ", "β"]),
        ],
    )
    def test_flag_symbols_present(self, capsys, argv, symbols):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 0
        text = capsys.readouterr().out
        for symbol in symbols:
            assert symbol in text


class TestSimCommand:
    def test_deterministic_rerun_byte_identical(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("c=2\nh=4\nw=4\nsteps=10\nt_train=100\nref_cov=1,0;0,2\n")
        out1, out2 = tmp_path / "run1", tmp_path / "run2"
        code1, stdout1, _ = run(
            capsys, "sim", "--config", cfg, "--out-dir", out1, "--seeds", 1, "--seed", 0
        )
        code2, stdout2, _ = run(
            capsys, "sim", "--config", cfg, "--out-dir", out2, "--seeds", 1, "--seed", 0
        )
        assert code1 == code2 == 0
        assert stdout1 == stdout2
        files1 = sorted(p.name for p in out1.iterdir())
        files2 = sorted(p.name for p in out2.iterdir())
        assert files1 == files2
        for name in files1:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_control_arm_summary_empty_gated(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("c=2\nh=4\nw=4\nsteps=10\nt_train=100\n")
        out = tmp_path / "out"
        code, _, _ = run(
            capsys, "sim", "--config", cfg, "--out-dir", out, "--seeds", 2, "--seed", 0
        )
        assert code == 0
        summary = json.loads((out / "control_summary.json").read_text())
        assert all(r["gated_steps"] == [] for r in summary["runs"])

    def test_toml_config(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text(
            'c = 2\nh = 4\nw = 4\nsteps = 10\nt_train = 100\n'
            'omega = 1.0\nref_cov = [[1.0, 0.0], [0.0, 2.0]]\n'
        )
        out = tmp_path / "out"
        code, stdout, _ = run(
            capsys, "sim", "--config", cfg, "--out-dir", out, "--seeds", 1, "--seed", 3
        )
        assert code == 0
        verdict = json.loads(stdout)
        assert set(verdict) >= {"control_cov_to_ref", "regwct_cov_to_ref", "seeds"}

    def test_bad_config_key_exit_2(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("nonsense=1\n")
        code, _, _ = run(capsys, "sim", "--config", cfg, "--out-dir", tmp_path / "o")
        assert code == 2
