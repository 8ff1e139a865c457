"""Encoder ablation on an order-sensitive toy set.

Every pair appears twice: verbatim (gold 5) and with one side's words
reversed (gold 1).  An order-blind encoder produces identical
predictions for both and cannot fit the data below a floor; the
max+LSTM encoder can.  All variants share the comparison stack and
objective, so the table isolates the encoder.
"""

from pairsim import model as md
from pairsim import training as tr
from pairsim.embeddings import EmbeddingTable, FusedLexicon
from pairsim.evaldata import PairDataset, SentencePairExample
from pairsim.objectives import ScoreSpec
from pairsim.rng import stream

words = ["bob", "mary", "likes", "hates", "dogs", "cats", "eats", "food",
         "runs", "fast", "the", "a", "red", "blue", "car", "bird", "slow"]
rng = stream(7, "demo-table")
lex = FusedLexicon(tables=[EmbeddingTable(
    name="demo", dim=8,
    vectors={w: rng.uniform(-1, 1, size=8) for w in words})], seed=7)

base = ["bob likes mary", "dogs eats food", "cats hates birds",
        "the car runs", "a red bird", "mary runs fast",
        "bob eats slow", "the blue food"]
rows = []
for s in base:
    rows.append((s, s, 5.0))
    rows.append((s, " ".join(reversed(s.split())), 1.0))
examples = [SentencePairExample(a.split(), b.split(), gold_score=g)
            for a, b, g in rows]
data = PairDataset(examples=examples, task="sts",
                   vocab={w for ex in examples for w in ex.tokens1 + ex.tokens2})

print("variant           final loss   train pearson")
for mode, kind in [("sent", "word_avg"), ("sent", "proj_avg"),
                   ("sent", "lstm_only"), ("sent", "maxcnn_only"),
                   ("sent", "maxlstm"), ("multi", "maxcnn_only"),
                   ("multi", "maxlstm")]:
    spec = md.ModelSpec(task="sts", encoder=kind, comparison=mode,
                        total_dim=lex.total_dim, H=16, l=16, L=4, d_neu=8,
                        C=6, dropout_p=0.0, score=ScoreSpec(6, 0.0, 5.0))
    params = md.build_model(spec, seed=13)
    result = tr.train(params, lex, data,
                      tr.TrainConfig(batch_size=30, epochs=100, seed=13))
    try:
        metric = md.dataset_metric(result.params, lex, data)
        shown = f"{metric:13.4f}"
    except Exception:
        shown = "    undefined"  # constant predictions have no correlation
    label = ("S" if mode == "sent" else "M") + "-" + kind
    print(f"{label:16s} {result.history[-1].train_loss:10.4f} {shown}")

print("\nthe order-blind encoders cannot separate the verbatim and")
print("reversed copies, so their loss stays pinned above the floor.")
