"""Wrapper around pretrained transformer speech encoders.

Loads a local or hub model, runs it in eval mode without dropout, and exposes
frame-level hidden states for a selectable layer.  The frame hop is derived
from the model's convolutional feature-extractor strides, so the EMB1 header
always carries the encoder's true frame rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from transformers import AutoConfig, AutoModel

from .audio import TARGET_RATE


class EncoderError(RuntimeError):
    pass


def _conv_hop_samples(config) -> int:
    strides = getattr(config, "conv_stride", None)
    if not strides:
        raise EncoderError(
            f"cannot derive a frame rate from config of type {type(config).__name__}"
        )
    return int(math.prod(strides))


@dataclass
class SpeechEncoder:
    model: torch.nn.Module
    frame_hop_ms: float
    dim: int
    n_layers: int
    normalize: bool

    @classmethod
    def load(cls, name_or_path: str) -> "SpeechEncoder":
        try:
            config = AutoConfig.from_pretrained(name_or_path)
            model = AutoModel.from_pretrained(name_or_path)
        except Exception as exc:
            raise EncoderError(f"failed to load encoder {name_or_path!r}: {exc}") from exc
        model.eval()
        hop = _conv_hop_samples(config)
        normalize = False
        try:
            from transformers import AutoFeatureExtractor

            extractor = AutoFeatureExtractor.from_pretrained(name_or_path)
            normalize = bool(getattr(extractor, "do_normalize", False))
        except Exception:
            pass  # no preprocessor config shipped with the model
        return cls(
            model=model,
            frame_hop_ms=1000.0 * hop / TARGET_RATE,
            dim=int(config.hidden_size),
            n_layers=int(config.num_hidden_layers),
            normalize=normalize,
        )

    def resolve_layer(self, layer: str | int) -> int:
        """Index into hidden_states; 'last' is the final transformer layer."""
        if layer == "last":
            return self.n_layers
        idx = int(layer)
        if not 0 <= idx <= self.n_layers:
            raise EncoderError(f"layer {idx} outside 0..{self.n_layers}")
        return idx

    def encode(self, samples: np.ndarray, layer: str | int = "last") -> np.ndarray:
        """(T, D) float32 hidden states for one utterance."""
        idx = self.resolve_layer(layer)
        x = np.asarray(samples, dtype=np.float32)
        if self.normalize:
            std = float(x.std())
            x = (x - float(x.mean())) / (std + 1e-7)
        with torch.no_grad():
            batch = torch.from_numpy(x).unsqueeze(0)
            out = self.model(batch, output_hidden_states=True)
        frames = out.hidden_states[idx][0].cpu().numpy().astype(np.float32)
        if frames.ndim != 2 or frames.shape[0] < 1:
            raise EncoderError("encoder produced no frames (input too short?)")
        return frames
