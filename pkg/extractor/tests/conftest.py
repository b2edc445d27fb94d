import os

import pytest

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

SENTENCES = [
    "The cats walked home",
    "dogs slept longer today",
    "birds sang old songs",
    "A faster horse won again",
    "the quicker path helped a runner",
    "unbelievable contraptions wobbled strangely",
]


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """A two-block random-weight causal model with a byte-level BPE
    tokenizer trained on a handful of sentences, saved as a normal local
    checkpoint directory.  Byte-level coverage means any text tokenizes."""
    import torch
    from tokenizers import Tokenizer, decoders, models, pre_tokenizers, trainers
    from transformers import GPT2Config, GPT2Model, PreTrainedTokenizerFast

    directory = tmp_path_factory.mktemp("tiny_model")

    tok = Tokenizer(models.BPE())
    tok.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=False)
    tok.decoder = decoders.ByteLevel()
    trainer = trainers.BpeTrainer(
        vocab_size=400,
        special_tokens=[],
        initial_alphabet=pre_tokenizers.ByteLevel.alphabet(),
        show_progress=False,
    )
    tok.train_from_iterator(SENTENCES * 10, trainer)
    fast = PreTrainedTokenizerFast(tokenizer_object=tok, model_max_length=32)
    fast.save_pretrained(directory)

    config = GPT2Config(
        vocab_size=tok.get_vocab_size(),
        n_positions=32,
        n_embd=16,
        n_layer=2,
        n_head=2,
        bos_token_id=0,
        eos_token_id=0,
    )
    torch.manual_seed(0)
    model = GPT2Model(config)
    model.eval()
    model.save_pretrained(directory)
    return str(directory)


@pytest.fixture(scope="session")
def manifest_path(tmp_path_factory):
    """A small ingested dataset manifest produced by the primary pipeline."""
    import yaml

    from layerprobe.cli import main as layerprobe_main

    root = tmp_path_factory.mktemp("dataset")
    lines = []
    recipes = [
        ("NOUN", "Number=Sing", ["cat", "dog", "bird", "horse", "path", "runner"]),
        ("VERB", "Tense=Past|VerbForm=Fin", ["walked", "slept", "sang", "won", "helped", "wobbled"]),
        ("ADJ", "Degree=Cmp", ["faster", "quicker", "longer", "older", "stranger", "bigger"]),
    ]
    sent = 0
    for upos, feats, words in recipes:
        for word in words:
            sent += 1
            lines += [
                f"# sent_id = x-{sent}",
                f"1\tThe\tthe\tDET\tDT\tDefinite=Def|PronType=Art\t2\tdet\t_\t_",
                f"2\t{word}\t{word}\t{upos}\t_\t{feats}\t0\troot\t_\t_",
                "",
            ]
    (root / "corpus.conllu").write_text("\n".join(lines) + "\n", encoding="utf-8")
    config = {
        "output": str(root / "out"),
        "seeds": {"split": 0, "control": 0, "probe": 0},
        "dataset": {"conllu": [str(root / "corpus.conllu")]},
    }
    (root / "run.yaml").write_text(yaml.safe_dump(config))
    assert layerprobe_main(["ingest", "--config", str(root / "run.yaml")]) == 0
    return str(root / "out" / "manifest.jsonl")
