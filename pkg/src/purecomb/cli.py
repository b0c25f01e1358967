"""Command-line front end.

Exit codes form a stable contract: 0 for a passing verdict or successful
command, 1 for a verified-false or failed-construction verdict, 2 for
malformed input or bad usage.

Two-slot files use the positional role convention: input factors are
(past, A-output, B-output) and output factors are (A-input, B-input,
future), in file order.  Chain layouts interleave the file's input and
output factors; --order overrides the interleaving by label.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import builders, combs, twoslot
from .errors import VerificationError
from .io import MatrixFileError, file_digest, load_matrix, save_matrix
from .layouts import SlotLayout, TwoSlotLayout
from .spaces import LinOp, Spaces, is_unitary

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(ValueError):
    pass


@dataclasses.dataclass
class Report:
    command: str
    inputs: dict
    verdict: str
    residuals: dict = dataclasses.field(default_factory=dict)
    details: dict = dataclasses.field(default_factory=dict)
    tolerances: dict = dataclasses.field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"command: {self.command}"]
        for name, digest in self.inputs.items():
            lines.append(f"input {name}: {digest}")
        lines.append(f"verdict: {self.verdict}")
        for key in sorted(self.residuals):
            lines.append(f"residual {key}: {self.residuals[key]:.3e}")
        for key in sorted(self.details):
            lines.append(f"{key}: {self.details[key]}")
        for key in sorted(self.tolerances):
            lines.append(f"tolerance {key}: {self.tolerances[key]:g}")
        return "\n".join(lines)


def _emit(report: Report, as_json: bool, out_path=None) -> None:
    text = report.to_json() if as_json else report.to_text()
    print(text)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(report.to_json())
            fh.write("\n")


def _parse_assignments(raw: str, what: str) -> dict[str, int]:
    out: dict[str, int] = {}
    for item in raw.split(","):
        if "=" not in item:
            raise UsageError(f"bad {what} entry {item!r}; expected label=dim")
        lab, val = item.split("=", 1)
        lab = lab.strip()
        try:
            out[lab] = int(val)
        except ValueError:
            raise UsageError(f"bad dimension in {what}: {item!r}") from None
        if out[lab] < 1:
            raise UsageError(f"non-positive dimension in {what}: {item!r}")
    return out


def _two_slot_layout(op: LinOp, dims_arg: str | None) -> TwoSlotLayout:
    if len(op.in_space) != 3 or len(op.out_space) != 3:
        raise UsageError(
            "a two-slot operator needs exactly three input and three output factors"
        )
    p, ao, bo = op.in_space.factors
    ai, bi, f = op.out_space.factors
    layout = TwoSlotLayout(p, ai, ao, bi, bo, f)
    if dims_arg:
        given = _parse_assignments(dims_arg, "--dims")
        have = {lab: d for lab, d in layout.all_factors}
        if given != have:
            raise UsageError(f"--dims {given} conflicts with file factors {have}")
    return layout


def _chain_layout(op: LinOp, order_arg: str | None) -> SlotLayout:
    if order_arg:
        order = [lab.strip() for lab in order_arg.split(",")]
    else:
        if len(op.in_space) != len(op.out_space):
            raise UsageError(
                "cannot interleave a chain from unequal factor counts; pass --order"
            )
        order = []
        for fin, fout in zip(op.in_space.factors, op.out_space.factors):
            order.extend([fin[0], fout[0]])
    factors = []
    for i, lab in enumerate(order):
        side = op.in_space if i % 2 == 0 else op.out_space
        if not side.has(lab):
            raise UsageError(f"chain label {lab!r} not found on the expected side")
        factors.append((lab, side.dim_of(lab)))
    return SlotLayout(tuple(factors))


def cmd_build(args) -> int:
    rng_seed = args.seed if args.seed is not None else 0
    if args.name == "switch":
        op, _ = builders.build_quantum_switch(args.dim or 2)
    elif args.name == "d3d":
        op, _ = builders.build_d3d_example()
    elif args.name == "random-comb":
        if not args.chain:
            raise UsageError("random-comb requires --chain H0=2,H1=2,...")
        pairs = [item.split("=") for item in args.chain.split(",")]
        try:
            factors = [(lab.strip(), int(d)) for lab, d in pairs]
        except ValueError:
            raise UsageError(f"bad --chain {args.chain!r}") from None
        op = builders.random_pure_comb(SlotLayout.of(*factors), rng_seed)
    elif args.name == "random-unitary":
        if args.dims:
            given = _parse_assignments(args.dims, "--dims")
            missing = {"P", "AI", "AO", "BI", "BO", "F"} - set(given)
            if missing:
                raise UsageError(f"--dims missing labels {sorted(missing)}")
            sp_in = Spaces.of(("P", given["P"]), ("AO", given["AO"]), ("BO", given["BO"]))
            sp_out = Spaces.of(("AI", given["AI"]), ("BI", given["BI"]), ("F", given["F"]))
            if sp_in.dim != sp_out.dim:
                raise UsageError("--dims do not give a square operator")
            rng = np.random.default_rng(rng_seed)
            op = LinOp(sp_out, sp_in, builders.haar_unitary(sp_in.dim, rng))
        elif args.dim:
            op = builders.random_unitary(args.dim, rng_seed)
        else:
            raise UsageError("random-unitary requires --dim or --dims")
    else:
        raise UsageError(f"unknown build target {args.name!r}")
    save_matrix(args.out, op)
    report = Report(
        command="build",
        inputs={},
        verdict="ok",
        details={
            "name": args.name,
            "out": str(args.out),
            "digest": file_digest(args.out),
            "shape": list(op.data.shape),
        },
    )
    _emit(report, args.json)
    return EXIT_PASS


def cmd_verify(args) -> int:
    op = load_matrix(args.path)
    inputs = {"matrix": file_digest(args.path)}
    tol = args.tol
    if args.kind == "pure-superchannel":
        layout = _two_slot_layout(op, args.dims)
        rep = twoslot.verify_pure_superchannel(op, layout, tol)
        verdict, residuals = rep.ok, dict(rep.residuals)
    elif args.kind == "pure-comb":
        layout = _chain_layout(op, args.order)
        rep = combs.verify_pure_comb_unitary(op, layout, tol)
        verdict = rep.ok
        residuals = {f"slot-{i + 1}": r for i, r in enumerate(rep.per_slot)}
    elif args.kind == "comb-choi":
        layout = _chain_layout_from_square(op, args.order)
        rep = combs.verify_comb_choi(op, layout, tol)
        verdict = rep.ok
        residuals = {f"level-{i}": r for i, r in enumerate(rep.level_residuals)}
        residuals["hermiticity"] = rep.hermiticity_residual
        residuals["min-eigenvalue"] = rep.min_eigenvalue
        residuals["normalization"] = rep.normalization_residual
    else:
        raise UsageError(f"unknown kind {args.kind!r}")
    report = Report(
        command="verify",
        inputs=inputs,
        verdict="pass" if verdict else "fail",
        residuals=residuals,
        tolerances={"tol": tol},
        details={"kind": args.kind},
    )
    _emit(report, args.json)
    return EXIT_PASS if verdict else EXIT_FAIL


def _chain_layout_from_square(op: LinOp, order_arg: str | None) -> SlotLayout:
    if order_arg:
        order = [lab.strip() for lab in order_arg.split(",")]
    else:
        order = list(op.out_space.labels)
    factors = tuple((lab, op.out_space.dim_of(lab)) for lab in order)
    if set(op.out_space.labels) != {lab for lab, _ in factors}:
        raise UsageError("--order must cover every factor of the Choi operator")
    return SlotLayout(factors)


def cmd_decompose(args) -> int:
    op = load_matrix(args.path)
    inputs = {"matrix": file_digest(args.path)}
    tol = args.tol
    written: list[str] = []
    details: dict = {"kind": args.kind}
    residuals: dict = {}
    try:
        if args.kind == "direct-sum":
            layout = _two_slot_layout(op, args.dims)
            decomp = twoslot.direct_sum_decompose(op, layout, tol)
            details["classification"] = decomp.classification
            details["block_p_dims"] = list(decomp.p_dims)
            details["block_f_dims"] = list(decomp.f_dims)
            residuals["off-block"] = decomp.off_block_residual
            blocks = {"ab": (decomp.block_ab, decomp.p_embed_ab, decomp.f_embed_ab),
                      "ba": (decomp.block_ba, decomp.p_embed_ba, decomp.f_embed_ba)}
            d_in = layout.a_out[1] * layout.b_out[1]
            d_out = layout.a_in[1] * layout.b_in[1]
            for tag, (blk, p_e, f_e) in blocks.items():
                if blk is None:
                    continue
                embedded = (
                    np.kron(np.eye(d_out), f_e) @ blk.data @ np.kron(p_e, np.eye(d_in)).conj().T
                )
                path = f"{args.out}.block-{tag}.json"
                save_matrix(path, LinOp(layout.out_space(), layout.in_space(), embedded))
                written.append(path)
            # a single causally ordered block additionally gets its staircase
            present = [(tag, blk) for tag, (blk, _, _) in blocks.items() if blk is not None]
            if len(present) == 1:
                tag, blk = present[0]
                chain = layout.with_dims(
                    blk.in_space.dim_of(layout.past[0]),
                    blk.out_space.dim_of(layout.future[0]),
                ).slot_chain(tag)
                circuit = combs.staircase_decompose(blk, chain, tol)
                details["ancilla_dims"] = list(circuit.ancilla_dims)
                for i, el in enumerate(circuit.elements):
                    el_path = f"{args.out}.element-{i}.json"
                    save_matrix(el_path, el)
                    written.append(el_path)
        elif args.kind == "staircase":
            layout = _chain_layout(op, args.order)
            circuit = combs.staircase_decompose(op, layout, tol)
            details["ancilla_dims"] = list(circuit.ancilla_dims)
            for i, el in enumerate(circuit.elements):
                el_path = f"{args.out}.element-{i}.json"
                save_matrix(el_path, el)
                written.append(el_path)
        else:
            raise UsageError(f"unknown kind {args.kind!r}")
    except VerificationError as exc:
        report = Report(
            command="decompose",
            inputs=inputs,
            verdict="fail",
            details={"kind": args.kind, "reason": str(exc)},
            tolerances={"tol": tol},
        )
        _emit(report, args.json, f"{args.out}.report.json")
        return EXIT_FAIL
    details["files"] = written
    report = Report(
        command="decompose",
        inputs=inputs,
        verdict="pass",
        residuals=residuals,
        details=details,
        tolerances={"tol": tol},
    )
    _emit(report, args.json, f"{args.out}.report.json")
    return EXIT_PASS


def cmd_assemble(args) -> int:
    ops = [load_matrix(p) for p in args.paths]
    inputs = {f"block-{i}": file_digest(p) for i, p in enumerate(args.paths)}
    first = ops[0]
    total = first.data.copy()
    for op in ops[1:]:
        if op.in_space != first.in_space or op.out_space != first.out_space:
            raise UsageError(
                f"blocks act on different spaces: {op.in_space.factors} vs {first.in_space.factors}"
            )
        total = total + op.data
    out_op = LinOp(first.out_space, first.in_space, total)
    ok, res = is_unitary(out_op, args.tol)
    save_matrix(args.out, out_op)
    report = Report(
        command="assemble",
        inputs=inputs,
        verdict="pass" if ok else "fail",
        residuals={"unitarity": res},
        details={"out": str(args.out), "digest": file_digest(args.out)},
        tolerances={"tol": args.tol},
    )
    _emit(report, args.json)
    return EXIT_PASS if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="purecomb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="write a constructed operator to a matrix file")
    p_build.add_argument("name", choices=["switch", "d3d", "random-comb", "random-unitary"])
    p_build.add_argument("--dim", type=int, default=None)
    p_build.add_argument("--dims", default=None, help="two-slot dims, e.g. P=4,AI=2,AO=2,BI=2,BO=2,F=4")
    p_build.add_argument("--chain", default=None, help="ordered chain dims, e.g. H0=2,H1=2,H2=2,H3=2")
    p_build.add_argument("--seed", type=int, default=None)
    p_build.add_argument("--out", required=True)
    p_build.add_argument("--json", action="store_true")
    p_build.set_defaults(func=cmd_build)

    p_verify = sub.add_parser("verify", help="run a structural verification on a matrix file")
    p_verify.add_argument("path")
    p_verify.add_argument("--kind", required=True,
                          choices=["pure-superchannel", "pure-comb", "comb-choi"])
    p_verify.add_argument("--dims", default=None)
    p_verify.add_argument("--order", default=None, help="chain order by label, e.g. H0,H1,H2,H3")
    p_verify.add_argument("--tol", type=float, default=1e-8)
    p_verify.add_argument("--json", action="store_true")
    p_verify.set_defaults(func=cmd_verify)

    p_dec = sub.add_parser("decompose", help="split an operator and write the pieces")
    p_dec.add_argument("path")
    p_dec.add_argument("--kind", required=True, choices=["direct-sum", "staircase"])
    p_dec.add_argument("--dims", default=None)
    p_dec.add_argument("--order", default=None)
    p_dec.add_argument("--tol", type=float, default=1e-8)
    p_dec.add_argument("--out", required=True, help="output path prefix")
    p_dec.add_argument("--json", action="store_true")
    p_dec.set_defaults(func=cmd_decompose)

    p_asm = sub.add_parser("assemble", help="sum embedded block files back into one operator")
    p_asm.add_argument("paths", nargs="+")
    p_asm.add_argument("--tol", type=float, default=1e-8)
    p_asm.add_argument("--out", required=True)
    p_asm.add_argument("--json", action="store_true")
    p_asm.set_defaults(func=cmd_assemble)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (UsageError, MatrixFileError, ValueError, OSError) as exc:
        if isinstance(exc, VerificationError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAIL
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
