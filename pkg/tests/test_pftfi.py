import pytest

from conftest import learning_docs, learning_runtime, runtime_snapshot
from madp.model import DocType, FieldKind, FieldSchema, MISSING, Stage
from madp.parse import ParserConfig
from madp.pftfi import (CorrectionFeedback, ErrorClass, PendingDocView,
                        apply_feedback, classify_error, inherit,
                        is_noop_correction, markdown_excerpt)
from madp.prompts import PromptVersion, initial_version
from madp.runtime import NoopCorrectionError

SCHEMA = [FieldSchema("invoice_date", FieldKind.DATE, required=True),
          FieldSchema("total_amount", FieldKind.MONEY, required=True),
          FieldSchema("line_items", FieldKind.LINE_ITEMS),
          FieldSchema("notes", FieldKind.TEXT)]


def fb(field="invoice_date", original="03/01/2026", corrected="2026-01-03"):
    return CorrectionFeedback("fb1", "doc-a", field, original, corrected,
                              DocType.INVOICE, "ACME", "rev", "t0")


class TestErrorClassification:
    def test_missing_takes_precedence(self):
        p = classify_error(fb(original=MISSING), SCHEMA)
        assert p.error_class == ErrorClass.MISSING

    def test_format_same_value_different_surface(self):
        p = classify_error(fb("invoice_date", "03/01/2026", "2026-01-03"), SCHEMA)
        assert p.error_class == ErrorClass.FORMAT

    def test_layout_for_line_items(self):
        p = classify_error(fb("line_items", "[]", '[{"description":"x"}]'), SCHEMA)
        assert p.error_class == ErrorClass.LAYOUT

    def test_value_otherwise(self):
        p = classify_error(fb("total_amount", "100 EUR", "200 EUR"), SCHEMA)
        assert p.error_class == ErrorClass.VALUE

    def test_noop_detection(self):
        assert is_noop_correction(fb("invoice_date", "2026-01-03", "03/01/2026"),
                                  FieldKind.DATE) is True
        assert is_noop_correction(fb(original=MISSING), FieldKind.DATE) is False
        assert is_noop_correction(fb("total_amount", "1 EUR", "2 EUR"),
                                  FieldKind.MONEY) is False


def test_markdown_excerpt_window():
    md = "\n".join(f"line {i}" for i in range(10))
    ex = markdown_excerpt(md, ["line 5"])
    assert ex.splitlines() == ["line 3", "line 4", "line 5", "line 6", "line 7"]
    assert markdown_excerpt(md, ["absent", MISSING]).splitlines()[0] == "line 0"


class TestApplyFeedback:
    def test_semantic_error_grows_prompt(self):
        v1 = initial_version(("ACME", "invoice"))
        pattern = classify_error(fb(original=MISSING), SCHEMA)
        v2 = apply_feedback(fb(original=MISSING), pattern, v1, ParserConfig(),
                            "Data fattura: 2026-01-03", SCHEMA)
        assert isinstance(v2, PromptVersion)
        assert v2.version_id == "v2" and v2.parent_version == "v1"
        assert len(v2.examples) == 1
        assert v2.examples[0].value == "2026-01-03"
        assert v2.created_from == ("fb1",)

    def test_format_error_adds_instruction_once(self):
        v1 = initial_version(("ACME", "invoice"))
        f = fb("invoice_date", "03/01/2026", "2026-01-03")
        pattern = classify_error(f, SCHEMA)
        v2 = apply_feedback(f, pattern, v1, ParserConfig(), "", SCHEMA)
        assert "dates must be ISO-8601 (YYYY-MM-DD)" in v2.instruction_lines
        v3 = apply_feedback(f, pattern, v2, ParserConfig(), "", SCHEMA)
        assert v3.instruction_lines.count("dates must be ISO-8601 (YYYY-MM-DD)") == 1

    def test_layout_error_bumps_parser_config(self):
        f = fb("line_items", "[]", '[{"description":"x"}]')
        pattern = classify_error(f, SCHEMA)
        cfg = apply_feedback(f, pattern, initial_version(("ACME", "invoice")),
                             ParserConfig(), "", SCHEMA)
        assert isinstance(cfg, ParserConfig)
        assert cfg.version == "p2"
        assert cfg.layout_hints[0].category == ("ACME", "invoice")


class TestInherit:
    V2 = PromptVersion("v2", ("ACME", "invoice"), "v1")

    def _view(self, doc_id, category=("ACME", "invoice"), stage=Stage.EXTRACTED,
              review_fields=frozenset()):
        return PendingDocView(doc_id, category, stage, review_fields)

    def test_same_category_pending_inherits(self):
        tasks = inherit(fb(), self.V2, [self._view("doc-b")])
        assert [t.doc_id for t in tasks] == ["doc-b"]
        assert tasks[0].version_id == "v2" and tasks[0].round == 1

    def test_source_doc_and_other_categories_excluded(self):
        views = [self._view("doc-a"), self._view("doc-c", ("GLOBEX", "invoice"))]
        assert inherit(fb(), self.V2, views) == []

    def test_in_review_needs_matching_field(self):
        hit = self._view("doc-b", stage=Stage.IN_REVIEW,
                         review_fields=frozenset({"invoice_date"}))
        miss = self._view("doc-d", stage=Stage.IN_REVIEW,
                          review_fields=frozenset({"notes"}))
        tasks = inherit(fb(), self.V2, [hit, miss])
        assert [t.doc_id for t in tasks] == ["doc-b"]

    def test_terminal_stages_excluded(self):
        views = [self._view("doc-b", stage=Stage.ACCEPTED),
                 self._view("doc-e", stage=Stage.FALLBACK)]
        assert inherit(fb(), self.V2, views) == []


class TestLearningLoop:
    """Correct A; same-category pending B re-extracts and auto-accepts; C untouched."""

    def test_end_to_end(self, tmp_path):
        rt = learning_runtime(tmp_path)
        rt.run_all()
        a, b, c = learning_docs()
        ida, idb, idc = a["doc_id"], b["doc_id"], c["doc_id"]
        # all three documents are in review: invoice_number missing under v1
        assert {t["doc_id"] for t in rt.queue("pending")} == {ida, idb, idc}
        for doc_id in (ida, idb, idc):
            assert any("invoice_number missing" in r
                       for r in rt.tasks[doc_id].reasons)

        result = rt.apply_correction(ida, "invoice_number",
                                     a["fields"]["invoice_number"]["value"])
        assert result["inherited"] == 1

        cat = tuple(a["category"])
        lineage = rt.prompts.lineage(cat)
        assert [v.version_id for v in lineage] == ["v1", "v2"]
        assert lineage[1].parent_version == "v1"
        assert len(lineage[1].examples) == 1

        # B re-extracted under v2 and auto-accepted without human action
        assert rt.units[idb].state.stage == Stage.ACCEPTED
        assert rt.units[idb].prompt_version == "v2"
        task_b = rt.tasks[idb]
        assert task_b.status == "resolved"
        assert task_b.resolution == "auto_after_inheritance"
        number_b = next(r for r in rt.units[idb].records if r.field == "invoice_number")
        assert number_b.chosen.normalized == b["fields"]["invoice_number"]["value"]

        # C (different category) untouched: still pending under v1
        assert rt.tasks[idc].status == "pending"
        assert rt.units[idc].state.stage == Stage.IN_REVIEW
        assert rt.prompts.head(tuple(c["category"])).version_id == "v1"

        # A itself carries the human value and re-validates
        number_a = next(r for r in rt.units[ida].records if r.field == "invoice_number")
        assert number_a.chosen.backend_id == "human"
        assert number_a.chosen.confidence == 1.0

    def test_replay_reproduces_final_state(self, tmp_path):
        rt = learning_runtime(tmp_path)
        rt.run_all()
        a, _, _ = learning_docs()
        rt.apply_correction(a["doc_id"], "invoice_number",
                            a["fields"]["invoice_number"]["value"])
        live = runtime_snapshot(rt)
        from madp.runtime import Runtime
        replayed = Runtime(workdir=tmp_path)
        assert runtime_snapshot(replayed) == live

    def test_noop_correction_rejected(self, tmp_path):
        rt = learning_runtime(tmp_path)
        rt.run_all()
        a, _, _ = learning_docs()
        rt.apply_correction(a["doc_id"], "invoice_number",
                            a["fields"]["invoice_number"]["value"])
        with pytest.raises(NoopCorrectionError):
            rt.apply_correction(a["doc_id"], "invoice_number",
                                a["fields"]["invoice_number"]["value"])
