import numpy as np
import pytest

from gmi import (
    KernelParams,
    Requirement,
    build_requirement,
    deserialize_requirement,
    prompt_weighted_score,
    serialize_requirement,
)
from gmi.errors import (
    DimensionMismatchError,
    SpecFormatError,
    ValidationError,
    ZeroNormError,
)


class TestBuildRequirement:
    def test_defaults(self, rng):
        req = build_requirement(rng.normal(size=4), rng.normal(size=3))
        assert req.prompt_provenance == "pseudo"
        assert req.prompt_text is None
        assert req.image_embedding.dtype == np.float64

    def test_user_provenance_and_text(self, rng):
        req = build_requirement(rng.normal(size=4), rng.normal(size=3),
                                provenance="user", prompt_text="a red fox")
        assert req.prompt_provenance == "user"
        assert req.prompt_text == "a red fox"

    def test_unknown_provenance(self, rng):
        with pytest.raises(ValidationError):
            build_requirement(rng.normal(size=4), rng.normal(size=3),
                              provenance="oracle")

    def test_zero_prompt_rejected(self, rng):
        with pytest.raises(ZeroNormError):
            build_requirement(rng.normal(size=4), np.zeros(3))

    def test_dim_pins(self, rng):
        img, prm = rng.normal(size=4), rng.normal(size=3)
        build_requirement(img, prm, image_dim=4, prompt_dim=3)
        with pytest.raises(DimensionMismatchError):
            build_requirement(img, prm, image_dim=5)
        with pytest.raises(DimensionMismatchError):
            build_requirement(img, prm, prompt_dim=2)

    def test_bad_prompt_text(self, rng):
        with pytest.raises(ValidationError):
            build_requirement(rng.normal(size=4), rng.normal(size=3),
                              prompt_text=17)


class TestRequirementWire:
    def test_round_trip_identity(self, rng):
        req = build_requirement(rng.normal(size=6), rng.normal(size=4),
                                provenance="user", prompt_text="naïve almond café")
        again = deserialize_requirement(serialize_requirement(req))
        assert again == req
        assert again.image_embedding.tobytes() == req.image_embedding.tobytes()
        assert again.prompt_embedding.tobytes() == req.prompt_embedding.tobytes()

    def test_missing_keys(self):
        with pytest.raises(SpecFormatError):
            deserialize_requirement('{"image_embedding": [1.0]}')

    def test_malformed_json_offset(self):
        with pytest.raises(SpecFormatError) as exc_info:
            deserialize_requirement("{nope")
        assert isinstance(exc_info.value.offset, int)

    def test_non_object(self):
        with pytest.raises(SpecFormatError):
            deserialize_requirement("[1, 2]")

    def test_dims_checked_at_parse(self, rng):
        payload = serialize_requirement(
            build_requirement(rng.normal(size=4), rng.normal(size=3)))
        deserialize_requirement(payload, image_dim=4, prompt_dim=3)
        with pytest.raises(DimensionMismatchError):
            deserialize_requirement(payload, image_dim=8)


class TestProvenanceNeutrality:
    def test_provenance_never_touches_scores(self, rng):
        """Same embeddings under both provenance tags must score bit-equal."""
        Z = rng.normal(size=(10, 6))
        Q = rng.normal(size=(10, 4))
        img, prm = rng.normal(size=6), rng.normal(size=4)
        pseudo = build_requirement(img, prm, provenance="pseudo")
        user = build_requirement(img, prm, provenance="user", prompt_text="t")
        params = KernelParams(0.02)
        s_pseudo = prompt_weighted_score(Z, Q, pseudo.image_embedding,
                                         pseudo.prompt_embedding, params)
        s_user = prompt_weighted_score(Z, Q, user.image_embedding,
                                       user.prompt_embedding, params)
        assert s_pseudo == s_user

    def test_requirement_matching_own_pair_scores_zero(self, rng):
        """A query identical to one spec sample, with a prompt orthogonal to
        every other spec prompt, reduces to the single-pair distance 0."""
        z = rng.normal(size=5)
        q = np.array([1.0, 0.0, 0.0])
        other_q = np.array([0.0, 1.0, 0.0])
        Z = np.vstack([z])
        Q = np.vstack([q])
        req = build_requirement(z, q)
        s = prompt_weighted_score(Z, Q, req.image_embedding,
                                  req.prompt_embedding, KernelParams(0.02))
        assert abs(s) <= 1e-12
        assert other_q @ q == 0.0


class TestEquality:
    def test_provenance_participates_in_equality(self, rng):
        img, prm = rng.normal(size=4), rng.normal(size=3)
        a = build_requirement(img, prm, provenance="pseudo")
        b = build_requirement(img, prm, provenance="user")
        assert a != b

    def test_other_types(self, rng):
        req = build_requirement(rng.normal(size=4), rng.normal(size=3))
        assert req != {"image_embedding": []}
        assert isinstance(req, Requirement)
