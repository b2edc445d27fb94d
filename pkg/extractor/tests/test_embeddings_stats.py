import json

import numpy as np
import pytest

from actextract.core import extract_activations, load_model_and_tokenizer
from actextract.embeddings import export_embeddings, word_encoding
from actextract.stats import tokenization_stats
from layerprobe import tensorstore

WORDS = ["cats", "walked", "horse", "unbelievable", "contraptions"]


class TestWordEncoding:
    def test_single_piece_word_has_single_wholeword_id(self, tiny_checkpoint):
        _, tokenizer = load_model_and_tokenizer(tiny_checkpoint)
        vocab = tokenizer.get_vocab()
        single = next(
            piece[1:]
            for piece in vocab
            if piece.startswith("Ġ") and piece[1:].isalpha() and len(piece) > 4
        )
        enc = word_encoding(tokenizer, single)
        assert len(enc["wholeword"]) == 1
        assert not enc["fallback"]

    def test_multi_piece_word_falls_back_minimal(self, tiny_checkpoint):
        _, tokenizer = load_model_and_tokenizer(tiny_checkpoint)
        enc = word_encoding(tokenizer, "zxqv")  # certainly not a trained merge
        assert enc["fallback"]
        assert len(enc["wholeword"]) >= 1
        assert len(enc["wholeword"]) <= len(enc["subtoken"])

    def test_subtoken_ids_round_trip_to_word(self, tiny_checkpoint):
        _, tokenizer = load_model_and_tokenizer(tiny_checkpoint)
        for word in WORDS:
            enc = word_encoding(tokenizer, word)
            assert tokenizer.decode(enc["subtoken"]).strip() == word


class TestExportEmbeddings:
    def test_standalone_store(self, tiny_checkpoint, tmp_path):
        out = tmp_path / "emb.store"
        table = export_embeddings(tiny_checkpoint, WORDS, out)
        model, tokenizer = load_model_and_tokenizer(tiny_checkpoint)
        assert table.vectors.shape == (len(tokenizer.get_vocab()), 16)
        loaded = tensorstore.read_embedding(out)
        assert np.array_equal(loaded.vectors, table.vectors)
        assert set(loaded.encodings) == set(WORDS)
        weights = model.get_input_embeddings().weight.detach().numpy()
        assert np.allclose(loaded.vectors, weights, atol=1e-6)

    def test_merge_into_existing_dump(self, tiny_checkpoint, manifest_path, tmp_path):
        out = tmp_path / "full.store"
        extract_activations(tiny_checkpoint, manifest_path, out)
        before = tensorstore.read_layer(out, 1).copy()
        export_embeddings(tiny_checkpoint, WORDS, out)
        # Layers survive the merge bit-exactly; the embedding slot fills in.
        assert np.array_equal(tensorstore.read_layer(out, 1), before)
        table = tensorstore.read_embedding(out)
        assert "cats" in table.encodings
        with open(manifest_path, "rb") as f:
            tensorstore.validate_store(out, f.read())


class TestTokenizationStats:
    def test_single_token_words_average_one(self, tiny_checkpoint, tmp_path):
        _, tokenizer = load_model_and_tokenizer(tiny_checkpoint)
        vocab = tokenizer.get_vocab()
        singles = [p[1:] for p in vocab if p.startswith("Ġ") and p[1:].isalpha()]
        words = sorted(singles, key=len, reverse=True)[:3]
        manifest = tmp_path / "singles.jsonl"
        rows = [
            {"id": i, "text": f"The {w}", "target_index": 1,
             "lemma": w, "inflection": "singular", "pos": "noun"}
            for i, w in enumerate(words)
        ]
        manifest.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        stats = tokenization_stats(manifest, tiny_checkpoint)
        assert stats["aligned"]["avg_tokens_per_word"] == 1.0
        assert stats["aligned"]["percent_multitoken"] == 0.0
        # No special tokens here, so both conventions agree.
        assert stats["standalone_with_specials"]["avg_tokens_per_word"] == 1.0

    def test_special_token_convention_adds_wrapping(self, tiny_checkpoint, tmp_path):
        # A BERT-style tokenizer wraps every input in [CLS] ... [SEP]; the
        # with-specials convention counts them, the aligned one never does.
        from tokenizers import Tokenizer, models, pre_tokenizers, processors
        from transformers import PreTrainedTokenizerFast

        vocab = {"[CLS]": 0, "[SEP]": 1, "[UNK]": 2, "the": 3, "cat": 4, "sat": 5}
        tok = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
        tok.pre_tokenizer = pre_tokenizers.Whitespace()
        tok.post_processor = processors.TemplateProcessing(
            single="[CLS] $A [SEP]",
            special_tokens=[("[CLS]", 0), ("[SEP]", 1)],
        )
        wrapped = PreTrainedTokenizerFast(
            tokenizer_object=tok,
            model_max_length=32,
            cls_token="[CLS]",
            sep_token="[SEP]",
            unk_token="[UNK]",
        )
        manifest = tmp_path / "bertish.jsonl"
        rows = [
            {"id": 0, "text": "the cat sat", "target_index": 1,
             "lemma": "cat", "inflection": "singular", "pos": "noun"}
        ]
        manifest.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        stats = tokenization_stats(manifest, "bert-style", tokenizer=wrapped)
        assert stats["aligned"]["avg_tokens_per_word"] == 1.0
        assert stats["aligned"]["percent_multitoken"] == 0.0
        assert stats["standalone_with_specials"]["avg_tokens_per_word"] == 3.0
        assert stats["standalone_with_specials"]["percent_multitoken"] == 100.0

    def test_stats_shape(self, tiny_checkpoint, manifest_path):
        stats = tokenization_stats(manifest_path, tiny_checkpoint)
        for convention in ("aligned", "standalone_with_specials"):
            block = stats[convention]
            assert block["avg_tokens_per_word"] >= 1.0
            assert block["max_tokens_per_word"] >= block["median_tokens_per_word"]
            assert 0.0 <= block["percent_multitoken"] <= 100.0
