import io
import json

import numpy as np
import pytest

from docrelate.errors import MalformedImage, MalformedInput, UnsupportedFormat
from docrelate.ingest import (Raster, Word, binarize, ingest_document,
                              load_raster, otsu_threshold, parse_ocr_words,
                              words_to_jsonwords)

TSV_HEADER = "level\tpage_num\tblock_num\tpar_num\tline_num\tword_num\tleft\ttop\twidth\theight\tconf\ttext"


def tsv_row(level, left, top, width, height, conf, text):
    return f"{level}\t1\t1\t1\t1\t1\t{left}\t{top}\t{width}\t{height}\t{conf}\t{text}"


def brute_force_otsu(pixels):
    """Independent Otsu: scan all thresholds, compute class variance directly."""
    flat = np.asarray(pixels).reshape(-1).astype(np.float64)
    best_t, best_var = 0, -1.0
    for t in range(256):
        lo = flat[flat < t]
        hi = flat[flat >= t]
        if lo.size == 0 or hi.size == 0:
            var = 0.0
        else:
            var = lo.size * hi.size * (lo.mean() - hi.mean()) ** 2
        if var > best_var:
            best_t, best_var = t, var
    return best_t


class TestParseTsv:
    def test_single_word_row(self):
        # left=100 top=40 width=60 height=12 -> bbox (100, 40, 160, 52)
        payload = tsv_row(5, 100, 40, 60, 12, 96, "SWIFT:").encode()
        words = parse_ocr_words(payload, "tsv")
        assert len(words) == 1
        assert words[0].text == "SWIFT:"
        assert words[0].bbox == (100, 40, 160, 52)
        assert words[0].confidence == pytest.approx(0.96)

    def test_empty_payload(self):
        assert parse_ocr_words(b"", "tsv") == []

    def test_header_and_structural_rows_skipped(self):
        rows = [TSV_HEADER,
                tsv_row(1, 0, 0, 500, 500, -1, ""),
                tsv_row(4, 0, 0, 500, 20, -1, ""),
                tsv_row(5, 10, 10, 50, 10, 88, "hello")]
        words = parse_ocr_words("\n".join(rows).encode(), "tsv")
        assert [w.text for w in words] == ["hello"]

    def test_zero_conf_and_empty_text_dropped(self):
        rows = [tsv_row(5, 10, 10, 50, 10, 0, "zero"),
                tsv_row(5, 10, 30, 50, 10, 91, "   "),
                tsv_row(5, 10, 50, 0, 10, 91, "flat"),
                tsv_row(5, 10, 70, 50, 10, 91, "kept")]
        words = parse_ocr_words("\n".join(rows).encode(), "tsv")
        assert [w.text for w in words] == ["kept"]

    def test_ordering_by_y_then_x(self):
        rows = [tsv_row(5, 300, 50, 40, 10, 90, "c"),
                tsv_row(5, 10, 50, 40, 10, 90, "a"),
                tsv_row(5, 10, 10, 40, 10, 90, "top")]
        words = parse_ocr_words("\n".join(rows).encode(), "tsv")
        assert [w.text for w in words] == ["top", "a", "c"]
        assert [w.word_id for w in words] == [0, 1, 2]

    def test_malformed_rows(self):
        with pytest.raises(MalformedInput):
            parse_ocr_words(b"5\t1\t1\t1", "tsv")
        with pytest.raises(MalformedInput):
            parse_ocr_words(tsv_row(5, "x", 1, 2, 3, 90, "t").encode(), "tsv")

    def test_unknown_format(self):
        with pytest.raises(UnsupportedFormat):
            parse_ocr_words(b"", "xml")


HOCR = """
<html><body>
<span class='ocr_line' title='bbox 0 0 500 20'>
 <span class='ocrx_word' title='bbox 100 40 160 52; x_wconf 96'>SWIFT:</span>
 <span class='ocrx_word' title='bbox 168 40 240 52; x_wconf 91'>SCBLUS33</span>
 <span class='ocrx_word' title='bbox 400 40 440 52; x_wconf 0'>noise</span>
</span>
</body></html>
"""


class TestParseHocr:
    def test_words_with_conf(self):
        words = parse_ocr_words(HOCR.encode(), "hocr")
        assert [(w.text, w.bbox) for w in words] == [
            ("SWIFT:", (100, 40, 160, 52)), ("SCBLUS33", (168, 40, 240, 52))]
        assert words[0].confidence == pytest.approx(0.96)

    def test_missing_bbox_rejected(self):
        bad = "<span class='ocrx_word' title='x_wconf 9'>w</span>"
        with pytest.raises(MalformedInput):
            parse_ocr_words(bad.encode(), "hocr")

    def test_nested_markup_inside_word(self):
        payload = ("<span class='ocrx_word' title='bbox 1 2 30 12'>"
                   "<strong>bo</strong>ld</span>").encode()
        words = parse_ocr_words(payload, "hocr")
        assert [w.text for w in words] == ["bold"]


class TestParseJsonwords:
    def test_identity_mapping(self):
        payload = b'[{"t":"SREEPUR","x0":10,"y0":10,"x1":80,"y1":22}]'
        words = parse_ocr_words(payload, "jsonwords")
        assert len(words) == 1
        assert words[0].text == "SREEPUR"
        assert words[0].bbox == (10, 10, 80, 22)
        assert words[0].confidence == 1.0

    def test_bad_json(self):
        with pytest.raises(MalformedInput):
            parse_ocr_words(b"{not json", "jsonwords")
        with pytest.raises(MalformedInput):
            parse_ocr_words(b'{"t": "obj"}', "jsonwords")
        with pytest.raises(MalformedInput):
            parse_ocr_words(b'[{"t":"x"}]', "jsonwords")

    def test_round_trip(self):
        payload = json.dumps([
            {"t": "one", "x0": 5, "y0": 5, "x1": 30, "y1": 15, "conf": 0.875},
            {"t": "two", "x0": 40, "y0": 5, "x1": 66, "y1": 15},
            {"t": 'q"uote', "x0": 5, "y0": 30, "x1": 30, "y1": 40},
        ]).encode()
        words = parse_ocr_words(payload, "jsonwords")
        again = parse_ocr_words(words_to_jsonwords(words), "jsonwords")
        assert again == words

    def test_determinism(self):
        payload = json.dumps([
            {"t": f"w{i}", "x0": (i * 37) % 200, "y0": (i * 11) % 100,
             "x1": (i * 37) % 200 + 20, "y1": (i * 11) % 100 + 10}
            for i in range(50)]).encode()
        first = parse_ocr_words(payload, "jsonwords")
        second = parse_ocr_words(payload, "jsonwords")
        assert first == second


def pgm_p2(width, height, maxval, values):
    body = " ".join(str(v) for v in values)
    return f"P2\n{width} {height}\n{maxval}\n{body}\n".encode()


class TestLoadRaster:
    def test_pgm_p2(self):
        r = load_raster(pgm_p2(2, 2, 255, [0, 0, 255, 255]), "pgm")
        assert (r.width, r.height) == (2, 2)
        assert r.pixels.reshape(-1).tolist() == [0, 0, 255, 255]

    def test_pgm_p5(self):
        payload = b"P5\n# comment\n3 2\n255\n" + bytes([1, 2, 3, 4, 5, 6])
        r = load_raster(payload, "pgm")
        assert r.pixels.reshape(-1).tolist() == [1, 2, 3, 4, 5, 6]

    def test_pgm_maxval_scaling(self):
        r = load_raster(pgm_p2(2, 1, 100, [0, 100]), "pgm")
        assert r.pixels.reshape(-1).tolist() == [0, 255]

    def test_truncated_pgm(self):
        with pytest.raises(MalformedImage):
            load_raster(b"P5\n4 4\n255\n\x00\x00", "pgm")
        with pytest.raises(MalformedImage):
            load_raster(pgm_p2(2, 2, 255, [0, 0, 255]), "pgm")

    def test_png_grayscale(self):
        from PIL import Image
        img = Image.new("L", (1, 1), color=255)
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        r = load_raster(buf.getvalue(), "png")
        assert (r.width, r.height) == (1, 1)
        assert r.pixels[0, 0] == 255

    def test_png_color_uses_bt601_luma(self):
        from PIL import Image
        img = Image.new("RGB", (1, 1), color=(200, 100, 50))
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        r = load_raster(buf.getvalue(), "png")
        assert r.pixels[0, 0] == round(0.299 * 200 + 0.587 * 100 + 0.114 * 50)

    def test_truncated_png(self):
        with pytest.raises(MalformedImage):
            load_raster(b"\x89PNG\r\n\x1a\n_garbage", "png")


class TestBinarize:
    def test_fixed_all_background(self):
        r = Raster(3, 2, [255] * 6)
        b = binarize(r, "fixed", threshold=128)
        assert b.ink_count() == 0

    def test_fixed_all_ink(self):
        r = Raster(3, 2, [0] * 6)
        b = binarize(r, "fixed", threshold=128)
        assert b.ink_count() == 6

    def test_otsu_bimodal_matches_brute_force(self):
        values = [0] * 50 + [255] * 50
        r = Raster(10, 10, values)
        t = otsu_threshold(r.pixels)
        assert t == brute_force_otsu(values)
        b = binarize(r, "otsu")
        assert b.ink_count() == 50

    def test_otsu_matches_brute_force_random(self, rng):
        for _ in range(20):
            values = rng.integers(0, 256, size=64)
            assert otsu_threshold(np.asarray(values, dtype=np.uint8).reshape(8, 8)) \
                == brute_force_otsu(values)


class TestIngestDocument:
    def test_words_only(self):
        doc = ingest_document(b'[{"t":"a","x0":1,"y0":2,"x1":11,"y1":12}]',
                              "jsonwords")
        assert doc.raster is None
        assert doc.page_size == (12, 13)

    def test_words_plus_pgm(self):
        doc = ingest_document(b'[{"t":"a","x0":0,"y0":0,"x1":2,"y1":1}]',
                              "jsonwords",
                              raster_payload=pgm_p2(4, 4, 255, [255] * 16))
        assert doc.raster is not None
        assert doc.page_size == (4, 4)

    def test_word_outside_raster_rejected(self):
        with pytest.raises(MalformedInput):
            ingest_document(b'[{"t":"a","x0":0,"y0":0,"x1":9,"y1":9}]',
                            "jsonwords",
                            raster_payload=pgm_p2(4, 4, 255, [255] * 16))

    def test_empty_document(self):
        doc = ingest_document(b"[]", "jsonwords")
        assert doc.words == [] and doc.page_size == (1, 1)


class TestWordInvariants:
    def test_degenerate_bbox_rejected(self):
        with pytest.raises(MalformedInput):
            Word(word_id=0, text="x", bbox=(5, 5, 5, 10))

    def test_newline_rejected(self):
        with pytest.raises(MalformedInput):
            Word(word_id=0, text="a\nb", bbox=(0, 0, 1, 1))
