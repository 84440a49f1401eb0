"""Smoke test for the dwtmark extension module."""

import tempfile
from pathlib import Path

import dwtmark


def main():
    hosts = dict(dwtmark.fixture_hosts())
    wm = dwtmark.logo_watermark()
    for label, host in hosts.items():
        for mode in ("ycbcr", "rgb"):
            marked, key = dwtmark.embed(host, wm, dwtmark.EmbedConfig(mode))
            got = dwtmark.extract(marked, key)
            assert dwtmark.error_bits(wm, got) == 0
            attacked = dwtmark.apply_attack(marked, "compress:6.0")
            err = dwtmark.error_bits(wm, dwtmark.extract(attacked, key))
            print(
                f"{label:8} {mode:5} psnr={dwtmark.psnr(host, marked):.2f} "
                f"corr={dwtmark.correlation(host, marked):.5f} compress6_err={err}"
            )

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        marked, key = dwtmark.embed(hosts["blobs"], wm)
        dwtmark.save_rgb_image(marked, tmp / "marked.png")
        dwtmark.save_key(key, tmp / "key.json")
        reloaded = dwtmark.load_rgb_image(tmp / "marked.png")
        assert reloaded == marked
        got = dwtmark.extract(reloaded, dwtmark.load_key(tmp / "key.json"))
        assert dwtmark.normalized_correlation(wm, got) == 1.0
    print("smoke test passed")


if __name__ == "__main__":
    main()
