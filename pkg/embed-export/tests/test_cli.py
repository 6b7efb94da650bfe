import json

from embed_export.cli import main


def test_cli_exports_with_hashed_encoder(tmp_path, capsys):
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text(
        json.dumps({"id": "d1", "sentences": ["one.", "two.", "three.", "four."]}) + "\n"
    )
    out = tmp_path / "vectors.bin"

    code = main([
        "--input", str(corpus),
        "--output", str(out),
        "--model", "hashed:16",
    ])
    assert code == 0
    assert "wrote 2 vectors (dim 16, 0 truncated)" in capsys.readouterr().out
    assert out.exists()

    manifest = json.loads((tmp_path / "vectors.bin.manifest.json").read_text())
    assert manifest["model"] == "hashed:16"
    assert manifest["paragraphs"] == 2

    from recallkit import load_embeddings

    assert load_embeddings(out).ids == ["d1#0", "d1#1"]


def test_cli_reports_data_errors(tmp_path, capsys):
    corpus = tmp_path / "bad.jsonl"
    corpus.write_text("not json\n")
    code = main([
        "--input", str(corpus),
        "--output", str(tmp_path / "v.bin"),
        "--model", "hashed:8",
    ])
    assert code == 2
    assert "malformed JSON" in capsys.readouterr().err


def test_cli_missing_input_is_a_data_error(tmp_path, capsys):
    code = main([
        "--input", str(tmp_path / "nope.jsonl"),
        "--output", str(tmp_path / "v.bin"),
        "--model", "hashed:8",
    ])
    assert code == 2


def test_cli_bad_encoder_spec(tmp_path, capsys):
    corpus = tmp_path / "c.jsonl"
    corpus.write_text(json.dumps({"id": "d", "sentences": ["x."]}) + "\n")
    code = main([
        "--input", str(corpus),
        "--output", str(tmp_path / "v.bin"),
        "--model", "hashed:abc",
    ])
    assert code == 2
    assert "bad hashed encoder spec" in capsys.readouterr().err
