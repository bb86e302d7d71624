"""Command-line front end.

Exit status: 0 success, 1 data error, 2 usage error.  A ``--config`` file of
``key = value`` lines (``#`` comments allowed) supplies defaults for the
chosen subcommand's options; command-line flags override it.
"""

import argparse
import sys

import numpy as np

from ._io import dumps_json
from .clustering import VALID_SPECS, LinkageSpec, build_cluster_tree
from .corpus import LanguageProportions, Vocabulary, build_vocabulary, downsampling_ratios, read_corpus
from .embedding import average_shared, format_embeddings, load_embeddings, mono_map, read_embedding_file
from .evaluation import Lexicon, bli_report, corpus_cer, levenshtein
from .hsoftmax import NodeParams, build_sign_bias, derive_codes, log_probs_vectorized
from .huffman import build_huffman
from .training import TrainConfig, class_means, make_blobs, random_features, train_flat_softmax, train_toy
from .tree import VocabTree


class UsageError(Exception):
    pass


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _json(obj):
    return dumps_json(obj, indent=1) + "\n"


def _need(args, *names):
    for name in names:
        if getattr(args, name) in (None, []):
            raise UsageError("--%s is required" % name.replace("_", "-"))


def _parse_floats(text):
    try:
        return np.array([float(x) for x in text.replace(",", " ").split()])
    except ValueError:
        raise UsageError("cannot parse numbers from %r" % text) from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_build_vocab(args):
    _need(args, "corpus")
    lines = read_corpus(args.corpus)
    vocab = build_vocabulary(lines)
    _write(args.output, vocab.to_tsv())
    if args.ratios_out:
        sizes = {}
        for lang, text in lines:
            sizes[lang] = sizes.get(lang, 0) + len(text)
        langs = [lang for lang in sizes if sizes[lang] > 0]
        props = LanguageProportions.from_sizes([sizes[lang] for lang in langs], args.alpha, args.ratio)
        ratios = downsampling_ratios(props)
        report = {"alpha": args.alpha, "ratio": args.ratio,
                  "languages": [{"language": lang, "share": float(p), "downsampling_ratio": float(r)}
                                for lang, p, r in zip(langs, props.shares, ratios)]}
        _write(args.ratios_out, _json(report))
    return 0


def cmd_build_tree(args):
    _need(args, "method")
    if args.method == "huffman":
        _need(args, "freq")
        tree = build_huffman(Vocabulary.load_tsv(args.freq))
    else:
        _need(args, "spec", "embeddings")
        try:
            spec = LinkageSpec.parse(args.spec)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if args.freq:
            tokens = Vocabulary.load_tsv(args.freq).tokens
            E = load_embeddings(args.embeddings, tokens)
        else:
            tokens, E = read_embedding_file(args.embeddings)
        tree = build_cluster_tree(E, spec, tokens)
    _write(args.output, tree.to_json())
    return 0


def cmd_codes(args):
    _need(args, "tree")
    _write(args.output, derive_codes(VocabTree.load(args.tree)).to_tsv())
    return 0


def cmd_sign_bias(args):
    _need(args, "tree")
    _write(args.output, build_sign_bias(VocabTree.load(args.tree)).to_json())
    return 0


def cmd_probs(args):
    _need(args, "tree")
    tree = VocabTree.load(args.tree)
    if args.hidden_file:
        with open(args.hidden_file, encoding="utf-8") as fh:
            H = np.array([_parse_floats(ln) for ln in fh if ln.strip()])
    elif args.hidden:
        H = _parse_floats(args.hidden)[None, :]
    elif args.zero_params:
        H = np.zeros((1, args.dim or 1))
    else:
        raise UsageError("give --hidden or --hidden-file")
    if args.zero_params:
        params = NodeParams.zeros(tree, H.shape[1])
    else:
        _need(args, "params")
        params = NodeParams.load(args.params, tree)
    if H.shape[1] != params.hidden_dim:
        raise ValueError("hidden states have dimension %d, parameters expect %d" % (H.shape[1], params.hidden_dim))
    logp = log_probs_vectorized(H, params, build_sign_bias(tree))
    tokens = [tree.token_text(t) for t in range(tree.n_leaves)]
    _write(args.output, _json({"tokens": tokens, "log_probs": [row.tolist() for row in logp]}))
    return 0


def cmd_train_toy(args):
    config = TrainConfig(lr=args.lr, epochs=args.epochs, seed=args.seed, batch_size=args.batch_size)
    tree = VocabTree.load(args.tree) if args.tree else None
    n_classes = tree.n_leaves if tree is not None else args.classes
    weights = 1.0 / np.arange(1, n_classes + 1) if args.skew else None
    X, y, _ = make_blobs(n_classes, args.dim, args.samples, args.seed, noise=args.noise, weights=weights)
    H = random_features(X, args.features, args.seed) if args.features > 0 else np.hstack([X, np.ones((len(X), 1))])
    method = "file" if tree is not None else args.tree_method
    if tree is None and method == "huffman":
        tree = build_huffman(list(np.bincount(y, minlength=n_classes) + 1))
    elif tree is None and method == "cluster":
        try:
            spec = LinkageSpec.parse(args.spec)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        tree = build_cluster_tree(class_means(X, y, n_classes), spec)
    metrics = {"method": method, "classes": int(n_classes), "samples": int(args.samples),
               "dim": int(args.dim), "features": int(args.features), "seed": int(args.seed),
               "epochs": int(args.epochs), "lr": float(args.lr), "batch_size": int(args.batch_size)}
    if method == "flat":
        _, acc = train_flat_softmax(H, y, n_classes, config)
    else:
        params, acc = train_toy(H, y, tree, config)
        if args.params_out:
            params.save(args.params_out, tree)
        if args.tree_out:
            tree.save(args.tree_out)
        metrics["max_depth"] = max(tree.depths())
    metrics["train_accuracy"] = acc
    _write(args.output, _json(metrics))
    return 0


def cmd_eval_cer(args):
    if args.ref_text is not None:
        refs, hyps = [args.ref_text], [args.hyp_text or ""]
    else:
        _need(args, "ref", "hyp")
        with open(args.ref, encoding="utf-8", newline="") as fh:
            refs = [ln.rstrip("\r\n") for ln in fh]
        with open(args.hyp, encoding="utf-8", newline="") as fh:
            hyps = [ln.rstrip("\r\n") for ln in fh]
        if len(refs) != len(hyps):
            raise ValueError("reference has %d lines, hypothesis %d" % (len(refs), len(hyps)))
    edits = sum(levenshtein(r, h) for r, h in zip(refs, hyps))
    report = {"cer": corpus_cer(refs, hyps), "edits": edits,
              "ref_chars": sum(len(r) for r in refs), "lines": len(refs)}
    _write(args.output, _json(report))
    return 0


def _emb_vocab(path):
    tokens, E = read_embedding_file(path)
    return E, Vocabulary(tokens, [1] * len(tokens))


def cmd_eval_bli(args):
    _need(args, "lexicon", "src_emb")
    lexicon = Lexicon.load_tsv(args.lexicon)
    src_E, src_vocab = _emb_vocab(args.src_emb)
    tgt_E, tgt_vocab = _emb_vocab(args.tgt_emb) if args.tgt_emb else (src_E, src_vocab)
    targets = None
    if args.pool == "targets":
        _need(args, "targets")
    if args.targets and args.pool != "lexicon":
        with open(args.targets, encoding="utf-8") as fh:
            targets = [ln.rstrip("\r\n") for ln in fh if ln.strip()]
    report = bli_report(lexicon, src_E, src_vocab, tgt_E, tgt_vocab, targets, args.metric)
    _write(args.output, _json(report.to_dict()))
    return 0


def cmd_mono_map(args):
    _need(args, "input")
    per_language = []
    order = []
    sizes = []
    for item in args.input:
        lang, sep, path = item.partition("=")
        if not sep:
            raise UsageError("--input expects LANG=PATH, got %r" % item)
        tokens, X = read_embedding_file(path)
        per_language.append((lang, tokens, X))
        sizes.append(len(tokens))
        order.extend(tokens)
    width = args.width or (max(sizes) if len(per_language) > 1 else None)
    tables = []
    for lang, tokens, X in per_language:
        mapped, clamped = mono_map(X, width, return_clamped=True)
        if clamped:
            print("mono-map: %s: clamped %d negative similarities" % (lang, clamped), file=sys.stderr)
        tables.append((lang, dict(zip(tokens, mapped))))
    vocab_tokens = list(dict.fromkeys(order))
    E = average_shared(tables, vocab_tokens)
    _write(args.output, format_embeddings(vocab_tokens, E))
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="vocabtree", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key = value defaults for the subcommand")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    s = sub.add_parser("build-vocab", help="character vocabulary with merged counts")
    s.add_argument("--corpus", help="UTF-8 file of lang<TAB>text lines")
    s.add_argument("-o", "--output", help="frequency TSV (default stdout)")
    s.add_argument("--ratios-out", help="also write per-language downsampling ratios (JSON); "
                   "shares are per-language character counts")
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--ratio", type=float, default=0.082)
    s.set_defaults(func=cmd_build_vocab)

    s = sub.add_parser("build-tree", help="Huffman or clustering vocabulary tree")
    s.add_argument("--method", choices=("huffman", "cluster"))
    s.add_argument("--freq", help="frequency TSV (token order for --method cluster)")
    s.add_argument("--embeddings", help="embedding text file")
    s.add_argument("--spec", help="family.linkage.metric, one of: " + ", ".join(VALID_SPECS))
    s.add_argument("-o", "--output", help="tree JSON (default stdout)")
    s.set_defaults(func=cmd_build_tree)

    s = sub.add_parser("codes", help="token<TAB>bitstring table")
    s.add_argument("--tree")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_codes)

    s = sub.add_parser("sign-bias", help="Sign/Bias/column-node matrices as JSON")
    s.add_argument("--tree")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_sign_bias)

    s = sub.add_parser("probs", help="leaf log-probabilities for hidden states")
    s.add_argument("--tree")
    s.add_argument("--params", help="binary parameter file")
    s.add_argument("--zero-params", action="store_true", help="use all-zero node vectors")
    s.add_argument("--dim", type=int, help="hidden size when --zero-params has no --hidden")
    s.add_argument("--hidden", help="one hidden state, comma or space separated")
    s.add_argument("--hidden-file", help="one hidden state per line")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_probs)

    s = sub.add_parser("train-toy", help="train on synthetic Gaussian blobs")
    s.add_argument("--tree", help="use this tree (its leaf count sets the class count)")
    s.add_argument("--tree-method", choices=("cluster", "huffman", "flat"), default="cluster")
    s.add_argument("--spec", default="agglomerative.ward.euclidean")
    s.add_argument("--classes", type=int, default=64)
    s.add_argument("--dim", type=int, default=16)
    s.add_argument("--samples", type=int, default=5000)
    s.add_argument("--noise", type=float, default=2.0)
    s.add_argument("--features", type=int, default=256, help="random tanh features (0: raw inputs)")
    s.add_argument("--skew", action="store_true", help="class frequencies proportional to 1/rank")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--epochs", type=int, default=30)
    s.add_argument("--lr", type=float, default=0.5)
    s.add_argument("--batch-size", type=int, default=32)
    s.add_argument("--params-out")
    s.add_argument("--tree-out")
    s.add_argument("-o", "--output", help="metrics JSON (default stdout)")
    s.set_defaults(func=cmd_train_toy)

    s = sub.add_parser("eval-cer", help="character error rate")
    s.add_argument("--ref", help="reference lines")
    s.add_argument("--hyp", help="hypothesis lines")
    s.add_argument("--ref-text")
    s.add_argument("--hyp-text")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_eval_cer)

    s = sub.add_parser("eval-bli", help="bilingual lexicon induction p@1")
    s.add_argument("--lexicon", help="source<TAB>target TSV")
    s.add_argument("--src-emb", help="source character embeddings")
    s.add_argument("--tgt-emb", help="target character embeddings (default: source file)")
    s.add_argument("--targets", help="candidate target words, one per line")
    s.add_argument("--pool", choices=("targets", "lexicon"), default=None,
                   help="candidate pool (default: --targets if given, else lexicon targets)")
    s.add_argument("--metric", default="cosine")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_eval_bli)

    s = sub.add_parser("mono-map", help="Mono-Map embeddings from monolingual files")
    s.add_argument("--input", action="append", default=[], help="LANG=PATH, repeatable")
    s.add_argument("--width", type=int, help="common output dimension")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_mono_map)
    return p


def _read_config(path):
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError("%s:%d: expected key = value" % (path, lineno))
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    try:
        if args.config:
            sub = parser._subparsers._group_actions[0].choices[args.command]
            known = {a.dest: a for a in sub._actions}
            config = _read_config(args.config)
            unknown = sorted(set(config) - set(known))
            if unknown:
                raise UsageError("unknown config keys for %s: %s" % (args.command, ", ".join(unknown)))
            for key, value in config.items():
                action = known[key]
                if isinstance(action, argparse._StoreTrueAction):
                    value = value.lower() in ("1", "true", "yes")
                elif isinstance(action, argparse._AppendAction):
                    value = [v.strip() for v in value.split(",")]
                sub.set_defaults(**{key: value})
            args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print("vocabtree %s: error: %s" % (args.command, msg), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
