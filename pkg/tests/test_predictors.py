"""Runner behavior: offset mapping, isolation, cardinality, box transforms."""

import json
import random

import pytest

from layerlab.docmodel import Box, Document, Entity, PageInfo, Span
from layerlab.errors import ConfigValidationError, MissingLayerError, UnknownPredictorError
from layerlab.predictors.base import (
    ImageOutput,
    ImagePredictor,
    ParseFailure,
    TaggedSpan,
    TextGenerationPredictor,
    TokenClassificationPredictor,
    extract_first_json_value,
    postprocess_to_record,
)
from layerlab.predictors.registry import ConfigField, PredictorDescriptor, Registry
from layerlab.predictors.runners import (
    crop_box_to_page,
    page_box_to_crop,
    run_image_predictor,
    run_text_predictor,
    run_token_predictor,
)


def doc_with_sentences(sentence_texts, sep=" "):
    symbols = sep.join(sentence_texts)
    doc = Document("d", symbols, [PageInfo(0, 612.0, 792.0)],
                   metadata={"source_filename": "t.pdf", "pipeline_config_hash": "h"})
    words, lines, sentences = [], [], []
    cursor = 0
    for i, text in enumerate(sentence_texts):
        span = Span(cursor, cursor + len(text))
        box = Box(0, 0.1, 0.05 + i * 0.03, 0.5, 0.02)
        words.append(Entity(i, spans=[span], boxes=[box]))
        lines.append(Entity(i, spans=[span], boxes=[box]))
        sentences.append(Entity(i, spans=[span], boxes=[box],
                                metadata={"section": "Methods", "paragraph_id": 0}))
        cursor += len(text) + len(sep)
    return (doc.add_layer("words", words).add_layer("lines", lines)
            .add_layer("sentences", sentences))


class EchoTagger(TokenClassificationPredictor):
    name = "echo"

    def tag_batch(self, texts):
        return [[TaggedSpan(0, min(4, len(t)), "X", 0.5)] if t else [] for t in texts]


class TestTokenRunner:
    def test_offset_mapping(self):
        doc = doc_with_sentences(["abcdef", "ghijkl"])
        result = run_token_predictor(doc, EchoTagger())
        layer = result.doc.layers["tagged_echo"]
        assert len(layer.entities) == 2
        first = layer.entities[0]
        assert doc.symbols[first.start:first.end] == "abcd"
        assert first.metadata["label"] == "X"
        assert first.metadata["section"] == "Methods"
        assert first.metadata["sentence_id"] == 0
        assert result.errors == []

    def test_mapping_correctness_property(self):
        texts = [f"sentence number {i} with words" for i in range(20)]
        doc = doc_with_sentences(texts)

        class RandomTagger(TokenClassificationPredictor):
            name = "rand"

            def tag_batch(self, batch):
                rng = random.Random(0)
                out = []
                for t in batch:
                    tags = []
                    for _ in range(3):
                        a = rng.randrange(0, len(t) - 1)
                        b = rng.randrange(a + 1, len(t) + 1)
                        tags.append(TaggedSpan(a, b, "R"))
                    out.append(tags)
                return out

        result = run_token_predictor(doc, RandomTagger(), batch_size=7)
        sentences = {s.id: s for s in doc.layers["sentences"].entities}
        for entity in result.doc.layers["tagged_rand"].entities:
            sent = sentences[entity.metadata["sentence_id"]]
            local_start = entity.start - sent.start
            local_end = entity.end - sent.start
            assert (doc.symbols[entity.start:entity.end]
                    == doc.text_of(sent)[local_start:local_end])

    def test_batch_failure_isolated(self):
        doc = doc_with_sentences([f"s{i} text here" for i in range(10)])

        class FailSecondBatch(TokenClassificationPredictor):
            name = "flaky"

            def __init__(self):
                self.calls = 0

            def tag_batch(self, texts):
                self.calls += 1
                if self.calls == 2:
                    raise RuntimeError("model exploded")
                return [[TaggedSpan(0, 2, "OK")] for _ in texts]

        result = run_token_predictor(doc, FailSecondBatch(), batch_size=4)
        # batch 2 covers sentences 4..7
        assert len(result.errors) == 4
        assert {e.entity_id for e in result.errors} == {4, 5, 6, 7}
        assert len(result.doc.layers["tagged_flaky"].entities) == 6
        assert all(e.predictor == "flaky" for e in result.errors)

    def test_bad_span_is_entity_error(self):
        doc = doc_with_sentences(["short", "also short"])

        class BadSpans(TokenClassificationPredictor):
            name = "bad"

            def tag_batch(self, texts):
                return [[TaggedSpan(0, 999, "B")] for _ in texts]

        result = run_token_predictor(doc, BadSpans())
        assert len(result.errors) == 2
        assert result.doc.layers["tagged_bad"].entities == []

    def test_wrong_output_length_fails_batch(self):
        doc = doc_with_sentences(["one", "two"])

        class WrongShape(TokenClassificationPredictor):
            name = "shape"

            def tag_batch(self, texts):
                return [[]]

        result = run_token_predictor(doc, WrongShape())
        assert len(result.errors) == 2

    def test_missing_sentences_layer(self):
        doc = Document("d", "text", [PageInfo(0, 612.0, 792.0)])
        with pytest.raises(MissingLayerError):
            run_token_predictor(doc, EchoTagger())

    def test_empty_document_empty_layer(self):
        doc = doc_with_sentences([])
        result = run_token_predictor(doc, EchoTagger())
        assert result.doc.layers["tagged_echo"].entities == []


def doc_with_paragraphs(n=3):
    texts = [f"Paragraph {i} body text." for i in range(n)]
    symbols = "\n\n".join(texts)
    doc = Document("d", symbols, [PageInfo(0, 612.0, 792.0)],
                   metadata={"source_filename": "t.pdf", "pipeline_config_hash": "h"})
    paragraphs = []
    cursor = 0
    for i, text in enumerate(texts):
        paragraphs.append(
            Entity(i, spans=[Span(cursor, cursor + len(text))],
                   boxes=[Box(0, 0.1, 0.01 + (i * 0.03) % 0.9, 0.8, 0.025)],
                   metadata={"section": "Intro" if i == 0 else "Methods"})
        )
        cursor += len(text) + 2
    return doc.add_layer("paragraphs", paragraphs)


class StubGenerator(TextGenerationPredictor):
    name = "stub"

    def __init__(self, fn):
        self.fn = fn

    def generate(self, entity_text):
        return self.fn(entity_text)


class TestTextRunner:
    def test_json_responses_parsed(self):
        doc = doc_with_paragraphs(3)
        result = run_text_predictor(doc, StubGenerator(lambda t: json.dumps({"len": len(t)})))
        layer = result.doc.layers["generated_stub"]
        assert len(layer.entities) == 3
        assert all(e.metadata["parsed"] is not None for e in layer.entities)
        assert all(e.metadata["parse_error"] is None for e in layer.entities)
        assert layer.entities[0].metadata["section"] == "Intro"

    def test_prose_response_kept_raw(self):
        doc = doc_with_paragraphs(1)
        result = run_text_predictor(doc, StubGenerator(lambda t: "Sure thing!"))
        entity = result.doc.layers["generated_stub"].entities[0]
        assert entity.metadata["parsed"] is None
        assert entity.metadata["parse_error"]
        assert entity.metadata["raw_response"] == "Sure thing!"

    def test_transport_error_isolated(self):
        doc = doc_with_paragraphs(3)

        def explode_on_second(text):
            if "1" in text:
                raise ConnectionError("boom")
            return "{}"

        result = run_text_predictor(doc, StubGenerator(explode_on_second))
        assert len(result.doc.layers["generated_stub"].entities) == 2
        assert len(result.errors) == 1
        assert result.errors[0].entity_id == 1
        # successes + errors == targets
        assert len(result.doc.layers["generated_stub"].entities) + len(result.errors) == 3

    def test_isolation_property_every_kth(self):
        doc = doc_with_paragraphs(30)
        calls = {"n": 0}

        def fail_every_third(text):
            calls["n"] += 1
            if calls["n"] % 3 == 0:
                raise RuntimeError("injected")
            return '{"ok": true}'

        result = run_text_predictor(doc, StubGenerator(fail_every_third))
        assert len(result.doc.layers["generated_stub"].entities) == 20
        assert len(result.errors) == 10

    def test_missing_target_layer(self):
        doc = Document("d", "text", [PageInfo(0, 612.0, 792.0)])
        with pytest.raises(MissingLayerError):
            run_text_predictor(doc, StubGenerator(lambda t: t))

    def test_rerun_gets_suffixed_layer(self):
        doc = doc_with_paragraphs(1)
        result = run_text_predictor(doc, StubGenerator(lambda t: "{}"))
        result2 = run_text_predictor(result.doc, StubGenerator(lambda t: "{}"))
        assert result2.layer_name == "generated_stub_2"
        assert "generated_stub" in result2.doc.layers


class TestPostprocess:
    def test_whole_json_object(self):
        assert postprocess_to_record('{"materials": ["zeolite"]}') == {"materials": ["zeolite"]}

    def test_prose_prefix_fails(self):
        assert isinstance(postprocess_to_record('Sure! {"a":1}'), ParseFailure)

    def test_empty_fails(self):
        assert isinstance(postprocess_to_record(""), ParseFailure)

    def test_non_object_fails(self):
        assert isinstance(postprocess_to_record("[1,2]"), ParseFailure)

    def test_whitespace_trimmed(self):
        assert postprocess_to_record('  {"a": 1}\n') == {"a": 1}


class TestExtractFirstJson:
    def test_prose_wrapped_object(self):
        assert extract_first_json_value('Sure! {"a": 1}') == {"a": 1}

    def test_first_value_wins(self):
        got = extract_first_json_value('x {"a": {"b": [1,2]}} y {"c":3}')
        assert got == {"a": {"b": [1, 2]}}

    def test_no_json(self):
        assert isinstance(extract_first_json_value("no json here"), ParseFailure)

    def test_code_fence(self):
        text = 'Here you go:\n```json\n{"k": [1, 2]}\n```\nDone.'
        assert extract_first_json_value(text) == {"k": [1, 2]}

    def test_brackets_inside_strings(self):
        assert extract_first_json_value('noise ["a]", "b"] tail') == ["a]", "b"]

    def test_unbalanced_then_valid(self):
        assert extract_first_json_value('{broken {"a": 1}') == {"a": 1}


def oracle_first_json(text):
    """Brute force: first start index with any parsable JSON container,
    smallest end."""
    for i, ch in enumerate(text):
        if ch not in "{[":
            continue
        for j in range(i + 2, len(text) + 1):
            try:
                return json.loads(text[i:j])
            except json.JSONDecodeError:
                continue
    return None


def test_extract_first_json_matches_oracle_randomized():
    rng = random.Random(42)
    fragments = [
        'hello', 'x:', '```', '"quoted text"', '{"a": 1}', '[1, 2, 3]',
        '{"nested": {"b": [1, {"c": "}"}]}}', '{broken', ']', '}', '}}',
        '{"s": "with ] bracket"}', 'true', '12.5', '{"empty": {}}', '[]',
    ]
    for _ in range(500):
        text = " ".join(rng.choice(fragments) for _ in range(rng.randrange(1, 7)))
        got = extract_first_json_value(text)
        expected = oracle_first_json(text)
        if expected is None:
            assert isinstance(got, ParseFailure)
        else:
            assert got == expected


class BoxStub(ImagePredictor):
    name = "boxstub"

    def __init__(self, output):
        self.output = output

    def process_entity(self, doc, entity, renderer):
        return self.output


def doc_with_table_region():
    doc = Document("d", "irrelevant", [PageInfo(0, 612.0, 792.0)],
                   metadata={"source_filename": "t.pdf", "pipeline_config_hash": "h"})
    table = Entity(0, spans=[Span(0, 10)], boxes=[Box(0, 0.1, 0.2, 0.4, 0.2)],
                   metadata={"section": "Results"})
    return doc.add_layer("tables", [table])


class TestImageRunner:
    def test_crop_relative_box_rescaled(self):
        doc = doc_with_table_region()
        output = ImageOutput(boxes=[(0.5, 0.5, 0.25, 0.25, "cell 0,0", 1.0)])
        result = run_image_predictor(doc, BoxStub(output), renderer=None)
        stored = result.doc.layers["image_boxstub"].entities[0].metadata["boxes"][0]
        page, x, y, w, h, label, score = stored
        assert (x, y) == (pytest.approx(0.30), pytest.approx(0.30))
        assert (w, h) == (pytest.approx(0.10), pytest.approx(0.05))
        assert label == "cell 0,0"

    def test_identity_box_covers_region(self):
        doc = doc_with_table_region()
        output = ImageOutput(boxes=[(0.0, 0.0, 1.0, 1.0, "all", 1.0)])
        result = run_image_predictor(doc, BoxStub(output), renderer=None)
        stored = result.doc.layers["image_boxstub"].entities[0].metadata["boxes"][0]
        assert stored[1:5] == [pytest.approx(0.1), pytest.approx(0.2),
                               pytest.approx(0.4), pytest.approx(0.2)]

    def test_empty_output_rejected(self):
        doc = doc_with_table_region()
        result = run_image_predictor(doc, BoxStub(ImageOutput()), renderer=None)
        assert len(result.errors) == 1
        assert result.doc.layers["image_boxstub"].entities == []

    def test_raw_text_only(self):
        doc = doc_with_table_region()
        result = run_image_predictor(doc, BoxStub(ImageOutput(raw_text="caption")), renderer=None)
        entity = result.doc.layers["image_boxstub"].entities[0]
        assert entity.metadata["raw_text"] == "caption"
        assert entity.metadata["table"] is None

    def test_empty_target_layer(self):
        doc = Document("d", "x", [PageInfo(0, 612.0, 792.0)],
                       metadata={}).add_layer("tables", [])
        result = run_image_predictor(doc, BoxStub(ImageOutput(raw_text="t")), renderer=None)
        assert result.doc.layers["image_boxstub"].entities == []

    def test_bad_table_rejected(self):
        doc = doc_with_table_region()
        output = ImageOutput(table={"a": [1, 2], "b": [1]})
        result = run_image_predictor(doc, BoxStub(output), renderer=None)
        assert len(result.errors) == 1


def test_box_transform_round_trip():
    rng = random.Random(3)
    for _ in range(300):
        crop = Box(0, rng.uniform(0, 0.5), rng.uniform(0, 0.5),
                   rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5))
        inner = (rng.uniform(0, 0.7), rng.uniform(0, 0.7),
                 rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3))
        mapped = crop_box_to_page(crop, inner)
        back = page_box_to_crop(crop, mapped)
        for a, b in zip(inner, back):
            assert abs(a - b) < 1e-9


class TestRegistry:
    def make_registry(self):
        registry = Registry()
        descriptor = PredictorDescriptor(
            name="echo", kind="token_classification",
            config_schema=(
                ConfigField("api_key", "string", required=True, secret=True),
                ConfigField("limit", "int", default=5),
            ),
        )
        registry.register(descriptor, lambda cfg: EchoTagger())
        return registry

    def test_register_twice_rejected(self):
        registry = self.make_registry()
        with pytest.raises(ValueError):
            registry.register(
                PredictorDescriptor(name="echo", kind="image"), lambda cfg: None
            )

    def test_missing_required_field_named(self):
        registry = self.make_registry()
        with pytest.raises(ConfigValidationError) as err:
            registry.instantiate("echo", {})
        assert "api_key" in err.value.fields

    def test_unknown_predictor(self):
        with pytest.raises(UnknownPredictorError):
            self.make_registry().instantiate("nope", {})

    def test_defaults_filled(self):
        registry = self.make_registry()
        assert registry.validate_config("echo", {"api_key": "E"})["limit"] == 5

    def test_type_mismatch(self):
        registry = self.make_registry()
        with pytest.raises(ConfigValidationError) as err:
            registry.instantiate("echo", {"api_key": "E", "limit": "ten"})
        assert "limit" in err.value.fields

    def test_unknown_field_rejected(self):
        registry = self.make_registry()
        with pytest.raises(ConfigValidationError):
            registry.instantiate("echo", {"api_key": "E", "bogus": 1})

    def test_list_order_stable_and_kinds(self):
        from layerlab.predictors.registry import default_registry

        registry = default_registry()
        names = [d.name for d in registry.list_predictors()]
        assert names == [d.name for d in registry.list_predictors()]
        kinds = {d.name: d.kind for d in registry.list_predictors()}
        assert kinds["gazetteer"] == "token_classification"
        assert kinds["chat"] == "text_generation"
        assert kinds["geometric_table"] == "image"
        assert kinds["remote_image"] == "image"
