"""Backbone zoo: the eight transfer-learning architectures plus a small
from-scratch baseline.

Every classifier is a pooled backbone with a fresh 6-way softmax head.
Pretrained ImageNet weights are requested per the spec'd experiment; when
they cannot be fetched (offline environments) the builder falls back to
random initialization with a logged warning — fine for plumbing tests,
meaningless for reproducing published accuracies.

`SmallCNN` is not from the paper's table: it is a three-block
convolutional baseline without batch norm whose random frozen features
stay informative, so fine-tune vs feature-extract comparisons remain
measurable with no pretrained weights at all.
"""

from __future__ import annotations

import logging
import os

os.environ.setdefault("KERAS_BACKEND", "tensorflow")
os.environ.setdefault("TF_CPP_MIN_LOG_LEVEL", "2")

import keras
from keras import applications

logger = logging.getLogger(__name__)

N_CLASSES = 6
IMAGE_SIZE = 224


class SpecError(ValueError):
    """Experiment spec names an unsupported model."""


def _small_cnn() -> keras.Model:
    return keras.Sequential(
        [
            keras.Input((IMAGE_SIZE, IMAGE_SIZE, 3)),
            keras.layers.Conv2D(16, 3, activation="relu", padding="same"),
            keras.layers.MaxPooling2D(4),
            keras.layers.Conv2D(32, 3, activation="relu", padding="same"),
            keras.layers.MaxPooling2D(4),
            keras.layers.Conv2D(64, 3, activation="relu", padding="same"),
            keras.layers.GlobalAveragePooling2D(),
        ],
        name="smallcnn_backbone",
    )


def _scale_to_unit(x):
    # same [-1, 1] convention as the mobilenet family
    return x / 127.5 - 1.0


# name -> (backbone constructor accepting weights=..., preprocess fn)
BACKBONES = {
    "VGG16": (applications.VGG16, applications.vgg16.preprocess_input),
    "VGG19": (applications.VGG19, applications.vgg19.preprocess_input),
    "ResNet50": (applications.ResNet50, applications.resnet50.preprocess_input),
    "InceptionV3": (applications.InceptionV3, applications.inception_v3.preprocess_input),
    "InceptionResNetV2": (
        applications.InceptionResNetV2,
        applications.inception_resnet_v2.preprocess_input,
    ),
    "MobileNetV2": (applications.MobileNetV2, applications.mobilenet_v2.preprocess_input),
    "EfficientNetB0": (
        applications.EfficientNetB0,
        applications.efficientnet.preprocess_input,
    ),
    "DenseNet121": (applications.DenseNet121, applications.densenet.preprocess_input),
}

SUPPORTED_MODELS = tuple(BACKBONES) + ("SmallCNN",)


def preprocess_for(name: str):
    if name == "SmallCNN":
        return _scale_to_unit
    if name not in BACKBONES:
        raise SpecError(f"unknown model {name!r}; supported: {SUPPORTED_MODELS}")
    return BACKBONES[name][1]


def build_classifier(name: str, trainable: bool, weights: str = "auto"):
    """Build (model, weights_used) with a 6-neuron softmax head.

    weights: "imagenet", "none", or "auto" (try imagenet, fall back to
    random init with a warning when it cannot be loaded).
    """
    if name not in SUPPORTED_MODELS:
        raise SpecError(f"unknown model {name!r}; supported: {SUPPORTED_MODELS}")
    if weights not in ("imagenet", "none", "auto"):
        raise SpecError(f"weights must be imagenet/none/auto, got {weights!r}")

    if name == "SmallCNN":
        backbone = _small_cnn()
        weights_used = "none"
    else:
        ctor = BACKBONES[name][0]
        kwargs = dict(include_top=False, input_shape=(IMAGE_SIZE, IMAGE_SIZE, 3), pooling="avg")
        if weights == "none":
            backbone = ctor(weights=None, **kwargs)
            weights_used = "none"
        else:
            try:
                backbone = ctor(weights="imagenet", **kwargs)
                weights_used = "imagenet"
            except Exception as exc:
                if weights == "imagenet":
                    raise SpecError(f"imagenet weights for {name} unavailable: {exc}") from exc
                logger.warning(
                    "imagenet weights for %s unavailable (%s); using random init",
                    name,
                    exc,
                )
                backbone = ctor(weights=None, **kwargs)
                weights_used = "none"

    backbone.trainable = trainable
    inputs = keras.Input((IMAGE_SIZE, IMAGE_SIZE, 3))
    # frozen backbones run in inference mode so batch-norm statistics stay put
    features = backbone(inputs, training=None if trainable else False)
    outputs = keras.layers.Dense(N_CLASSES, activation="softmax", name="event_head")(features)
    return keras.Model(inputs, outputs, name=f"{name.lower()}_classifier"), weights_used
