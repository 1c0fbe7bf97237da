"""
End-to-end pipeline and the results table
=========================================

Split, featurise, scale, oversample, train the stack and print the table
with F1, precision, recall, AUC, Brier loss and accuracy for each model.
"""

from billfate import config
from billfate.corpus import generate_synthetic_corpus, kenya_shaped_spec, synthetic_vocabulary
from billfate.embeddings import generate_synthetic_embeddings
from billfate.evaluation import format_table
from billfate.features import apply_scaler, fit_scaler
from billfate.pipeline import ablation_oversampling, evaluate_pipeline, prepare, split_records, train_pipeline

spec = kenya_shaped_spec(noise=0.1)
records = generate_synthetic_corpus(spec, seed=2)
table = generate_synthetic_embeddings(synthetic_vocabulary(spec), dim=20, seed=2)
cfg = config.resolve({"embeddings": {"dim": 20}})

# %%
pipe, test = train_pipeline(records, cfg, table)
reports = evaluate_pipeline(pipe, test)
print(format_table(reports))

# %%
# The persisted model is a JSON document with a digest over its contents.
doc = pipe.to_dict()
print(doc["representation"], "width", pipe.schema.width, "digest", doc["digest"][:16])

# %%
# Same split and scaler, with and without SMOTE.
train_r, test_r = split_records(records, cfg)
raw_train, raw_test, _ = prepare(train_r, test_r, cfg, table)
scaler = fit_scaler(raw_train)
ab = ablation_oversampling(apply_scaler(scaler, raw_train), apply_scaler(scaler, raw_test), cfg)
for name, d in ab["deltas"].items():
    print(f"{name:24s} precision[enacted] {d['precision[enacted]']:+.3f}  "
          f"precision[not_enacted] {d['precision[not_enacted]']:+.3f}")
