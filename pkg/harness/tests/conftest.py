import json

import pytest

from harness_fixtures import NER_LABELS, SENTENCES, make_rows, write_corpus


@pytest.fixture(scope="session")
def tiny_checkpoints(tmp_path_factory):
    """Small random-weight checkpoints saved to disk, loadable by path."""
    from tokenizers import Tokenizer, models, pre_tokenizers, trainers
    from transformers import (
        BertConfig,
        BertForTokenClassification,
        BertModel,
        PreTrainedTokenizerFast,
    )

    root = tmp_path_factory.mktemp("checkpoints")
    tok = Tokenizer(models.WordPiece(unk_token="[UNK]"))
    tok.pre_tokenizer = pre_tokenizers.Whitespace()
    trainer = trainers.WordPieceTrainer(
        vocab_size=300, special_tokens=["[PAD]", "[UNK]", "[CLS]", "[SEP]"]
    )
    tok.train_from_iterator(SENTENCES * 3, trainer)
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        unk_token="[UNK]", pad_token="[PAD]", cls_token="[CLS]", sep_token="[SEP]",
    )

    config = BertConfig(
        vocab_size=fast.vocab_size + 10,
        hidden_size=32,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
        num_labels=len(NER_LABELS),
        id2label=dict(enumerate(NER_LABELS)),
        label2id={l: i for i, l in enumerate(NER_LABELS)},
    )

    import torch

    torch.manual_seed(0)
    ner_dir = root / "tiny-ner"
    BertForTokenClassification(config).save_pretrained(ner_dir)
    fast.save_pretrained(ner_dir)

    base_dir = root / "tiny-base"
    BertModel(BertConfig(
        vocab_size=fast.vocab_size + 10,
        hidden_size=32,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
    )).save_pretrained(base_dir)
    fast.save_pretrained(base_dir)
    return {"ner": str(ner_dir), "base": str(base_dir)}


@pytest.fixture(scope="session")
def slice_files(tmp_path_factory):
    """A 20-sample corpus slice plus its locality feature file."""
    root = tmp_path_factory.mktemp("slice")
    rows = make_rows(20)
    train_csv = write_corpus(root / "train.csv", rows)
    valid_csv = write_corpus(root / "valid.csv", rows)

    features = root / "features.jsonl"
    with open(features, "w", encoding="utf-8") as fh:
        for row in rows:
            the_star = row["Target"].startswith("the")
            vec = [0, 0, 0, int(the_star), 0, 0]
            fh.write(json.dumps({"id": row["ID"], "features": vec}) + "\n")
    return {"train": str(train_csv), "valid": str(valid_csv), "features": str(features)}
