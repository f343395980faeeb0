import json

import numpy as np
import pytest
import torch
from scipy.io import wavfile


@pytest.fixture(scope="session")
def tiny_encoder_dir(tmp_path_factory):
    """Randomly initialized wav2vec-style model with the standard 320-sample
    conv stride stack (20 ms frames), small enough to run in tests."""
    from transformers import Wav2Vec2Config, Wav2Vec2FeatureExtractor, Wav2Vec2Model

    torch.manual_seed(1234)
    config = Wav2Vec2Config(
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        conv_dim=(32, 32, 32, 32, 32, 32, 32),
        conv_stride=(5, 2, 2, 2, 2, 2, 2),
        conv_kernel=(10, 3, 3, 3, 3, 2, 2),
        num_conv_pos_embeddings=16,
        num_conv_pos_embedding_groups=4,
    )
    model = Wav2Vec2Model(config)
    target = tmp_path_factory.mktemp("tiny_encoder")
    model.save_pretrained(target)
    Wav2Vec2FeatureExtractor(
        feature_size=1, sampling_rate=16000, do_normalize=True,
        return_attention_mask=False,
    ).save_pretrained(target)
    return target


@pytest.fixture(scope="session")
def sample_set(tmp_path_factory):
    """Three 16 kHz WAVs plus a manifest pointing at them."""
    root = tmp_path_factory.mktemp("wavs")
    rng = np.random.default_rng(7)
    entries = []
    for i in range(3):
        uid = f"utt{i}"
        n = 16000 + 480 * i
        samples = (0.2 * rng.standard_normal(n)).astype(np.float32)
        path = root / f"{uid}.wav"
        wavfile.write(path, 16000, samples)
        entries.append({"utterance_id": uid, "role": "candidate", "index": 0,
                        "wav_path": str(path)})
    manifest = root / "manifest.jsonl"
    with open(manifest, "w") as f:
        for entry in entries:
            f.write(json.dumps(entry) + "\n")
    return root, manifest
