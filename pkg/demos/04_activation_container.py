"""The activation container: random access, checksums, manifest alignment.

Every analysis pairs activation rows with dataset labels by position, so the
container binds itself to the manifest it was extracted against and refuses
to be read across a mismatch.  Blocks carry checksums, so corruption is an
error rather than silently wrong numbers.
"""

import tempfile

import numpy as np

from layerprobe.tensorstore import (
    AlignmentError,
    EmbeddingTable,
    StoreHeader,
    StoreIntegrityError,
    manifest_digest,
    read_embedding,
    read_layer,
    validate_store,
    write_store,
)

manifest = b'{"id": 0, "text": "demo"}\n'
rng = np.random.default_rng(1)
layers = [rng.standard_normal((6, 4)).astype(np.float32) for _ in range(3)]
table = EmbeddingTable(
    vectors=rng.standard_normal((5, 4)).astype(np.float32),
    pieces=("the", "cat", "sat", "mat", "dog"),
    encodings={"cat": {"subtoken": [1], "wholeword": [1]}},
)

with tempfile.TemporaryDirectory() as tmp:
    path = f"{tmp}/demo.store"
    header = StoreHeader(
        model_id="demo-model",
        layer_count=3,
        example_count=6,
        hidden_dim=4,
        manifest_digest=manifest_digest(manifest),
    )
    write_store(header, layers, path, embedding=table)
    print("wrote store:", validate_store(path, manifest))

    got = read_layer(path, 1)
    print("layer 1 round-trips bit-exact:", got.tobytes() == layers[1].tobytes())
    print("embedding pieces:", read_embedding(path).pieces)

    try:
        validate_store(path, b"some other manifest")
    except AlignmentError as err:
        print("alignment check works:", err)

    with open(path, "rb") as f:
        blob = bytearray(f.read())
    blob[-2] ^= 0xFF  # flip one byte inside the last block
    with open(path, "wb") as f:
        f.write(bytes(blob))
    try:
        read_layer(path, 2)
    except StoreIntegrityError as err:
        print("corruption detected:", err)
