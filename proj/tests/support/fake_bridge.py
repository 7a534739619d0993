# SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
# SPDX-License-Identifier: Apache-2.0

"""Minimal bridge server for tests: a handful of f32 numpy kernels behind the
line-delimited JSON protocol, plus flags that make it misbehave."""

import argparse
import base64
import json
import sys
import time

import numpy as np

OPS = ["relu", "__add__", "__mul__", "linear", "dropout"]


def decode(t):
    dt = "<f4" if t["dtype"] == "f32" else "<f8"
    raw = np.frombuffer(base64.b64decode(t["b64"]), dtype=dt)
    return raw.reshape(t["shape"]).astype(np.float32)


def encode(a):
    a = np.ascontiguousarray(a, dtype="<f4")
    return {"dtype": "f32", "shape": list(a.shape), "b64": base64.b64encode(a.tobytes()).decode()}


def scalar(v):
    return None if v["kind"] == "none" else v["value"]


def run_op(api, args):
    x = args["input"]
    if api == "relu":
        return np.maximum(x, np.float32(0))
    if api == "__add__":
        return x + args["other"]
    if api == "__mul__":
        return x * args["other"]
    if api == "linear":
        y = x @ args["weight"].T
        return y + args["bias"] if args.get("bias") is not None else y
    if api == "dropout":
        p = args.get("p", 0.5)
        if p is not None and not 0.0 <= p <= 1.0:
            raise ValueError(f"dropout probability has to be between 0 and 1, but got {p}")
        if args.get("training"):
            raise ValueError("training mode is not supported here")
        return x
    raise ValueError(f"unsupported op {api}")


def run_case(case, omit_last):
    nodes = {n["id"]: n["api"] for n in case["pattern"]["nodes"]}
    preds = {n: [] for n in nodes}
    for e in case["pattern"]["edges"]:
        preds[e["dst"]].append(e["src"])
    bindings = {n: {} for n in nodes}
    for b in case["bindings"]:
        bindings[b["node"]][b["param"]] = b
    done, results, outputs = set(), [], {}
    while len(done) < len(nodes):
        n = min(k for k in nodes if k not in done and all(p in done for p in preds[k]))
        done.add(n)
        if any(p not in outputs for p in preds[n]):
            results.append({"id": n, "crash": {"kind": "skipped", "category": "skipped", "message": "upstream"}})
            continue
        args = {}
        for name, b in bindings[n].items():
            if b["kind"] == "dependent":
                args[name] = outputs[b["src"]]
            elif b["kind"] == "tensor":
                args[name] = decode(b["tensor"])
            else:
                args[name] = scalar(b["value"])
        try:
            outputs[n] = run_op(nodes[n], args)
            results.append({"id": n, "tensor": encode(outputs[n])})
        except ValueError as err:
            results.append({"id": n, "crash": {"kind": "error", "message": str(err)}})
    if omit_last:
        results.pop()
    return results


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--version", type=int, default=1)
    ap.add_argument("--devices", default="cpu")
    ap.add_argument("--die-on-hello", action="store_true")
    ap.add_argument("--die-after", type=int, default=-1)
    ap.add_argument("--error-reply", action="store_true")
    ap.add_argument("--garbage", action="store_true")
    ap.add_argument("--hang", action="store_true")
    ap.add_argument("--omit-node", action="store_true")
    opts = ap.parse_args()

    served = 0
    for line in sys.stdin:
        req = json.loads(line)
        if req["type"] == "hello":
            if opts.die_on_hello:
                return 3
            reply = {"type": "hello", "version": opts.version, "devices": opts.devices.split(","), "ops": OPS}
        elif served == opts.die_after:
            return 4
        elif opts.hang:
            time.sleep(30)
            return 0
        elif opts.garbage:
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
            continue
        elif opts.error_reply:
            reply = {"type": "error", "message": "device lost"}
        else:
            if req["device"] not in opts.devices.split(","):
                reply = {"type": "error", "message": "no such device"}
            else:
                reply = {"type": "case_result", "nodes": run_case(req["case"], opts.omit_node)}
            served += 1
        sys.stdout.write(json.dumps(reply) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
