#!/usr/bin/env python3
"""Convert the public cube-toss export into cubesim trajectory CSV files.

One-time tool. Each input file holds one toss as a (T, >=13) array with
columns position(3), quaternion(4), linear velocity(3), angular velocity(3);
trailing columns (e.g. controls) are dropped. Supported inputs: .pt (needs
torch), .npy, .csv/.txt (comma or whitespace separated, no header).

Conventions of the source are not fixed here; pass them explicitly:

  --quat-order    wxyz or xyzw
  --omega-frame   world or body (body rates are rotated into world)
  --length-scale  factor applied to positions and linear velocities
  --rate          sample rate of the source in Hz

Example:

  tools/convert_contactnets.py data/tosses out/ --quat-order wxyz \\
      --omega-frame body --length-scale 1.0 --rate 148
"""

import argparse
import pathlib
import sys

import numpy as np

COLUMNS = "t,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz"


def load_array(path):
    suffix = path.suffix.lower()
    if suffix == ".pt":
        import torch

        data = torch.load(path, map_location="cpu")
        if isinstance(data, (list, tuple)):
            data = data[0]
        return np.asarray(data.detach().numpy() if hasattr(data, "detach") else data, dtype=float)
    if suffix == ".npy":
        return np.load(path).astype(float)
    text = path.read_text()
    delimiter = "," if "," in text.splitlines()[0] else None
    return np.loadtxt(path, delimiter=delimiter, ndmin=2)


def quat_rotate(q, v):
    # q is (w, x, y, z) per row; rotates v by q.
    w = q[:, :1]
    u = q[:, 1:]
    t = 2.0 * np.cross(u, v)
    return v + w * t + np.cross(u, t)


def convert(arr, quat_order, omega_frame, scale):
    if arr.ndim != 2 or arr.shape[1] < 13:
        raise ValueError(f"expected a (T, >=13) array, got shape {arr.shape}")
    arr = arr[:, :13]
    p = arr[:, 0:3] * scale
    q = arr[:, 3:7]
    if quat_order == "xyzw":
        q = q[:, [3, 0, 1, 2]]
    norms = np.linalg.norm(q, axis=1, keepdims=True)
    if np.any(np.abs(norms - 1.0) > 1e-3):
        raise ValueError("quaternion norm off by more than 1e-3; check --quat-order")
    v = arr[:, 7:10] * scale
    w = arr[:, 10:13]
    if omega_frame == "body":
        w = quat_rotate(q / norms, w)
    if not np.all(np.isfinite(np.hstack([p, q, v, w]))):
        raise ValueError("non-finite values")
    return p, q, v, w


def write_csv(path, name, rate, side, mass, p, q, v, w):
    with open(path, "w") as out:
        out.write(f"# rate_hz: {rate!r}\n")
        out.write(f"# name: {name}\n")
        out.write("# body: cube\n")
        out.write(f"# side_length_m: {side!r}\n")
        out.write(f"# mass_kg: {mass!r}\n")
        out.write(COLUMNS + "\n")
        for i in range(p.shape[0]):
            row = [i / rate, *p[i], *q[i], *v[i], *w[i]]
            out.write(",".join(repr(float(x)) for x in row) + "\n")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("src", type=pathlib.Path, help="directory of source toss files")
    ap.add_argument("dst", type=pathlib.Path, help="output directory")
    ap.add_argument("--quat-order", choices=["wxyz", "xyzw"], required=True)
    ap.add_argument("--omega-frame", choices=["world", "body"], required=True)
    ap.add_argument("--length-scale", type=float, default=1.0)
    ap.add_argument("--rate", type=float, default=148.0)
    ap.add_argument("--side-length", type=float, default=0.1)
    ap.add_argument("--mass", type=float, default=0.37)
    args = ap.parse_args(argv)

    files = sorted(f for f in args.src.iterdir() if f.suffix.lower() in {".pt", ".npy", ".csv", ".txt"})
    if not files:
        print(f"{args.src}: no input files", file=sys.stderr)
        return 1
    args.dst.mkdir(parents=True, exist_ok=True)
    failed = 0
    for f in files:
        try:
            p, q, v, w = convert(load_array(f), args.quat_order, args.omega_frame, args.length_scale)
        except Exception as e:  # report and keep going
            print(f"{f}: {e}", file=sys.stderr)
            failed += 1
            continue
        write_csv(args.dst / f"{f.stem}.csv", f.stem, args.rate, args.side_length, args.mass, p, q, v, w)
    print(f"converted {len(files) - failed} of {len(files)} files into {args.dst}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
