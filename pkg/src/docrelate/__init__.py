"""docrelate: deterministic information extraction from OCR'd documents.

Pipeline: ingest OCR word boxes (and optionally the page raster), derive
visual entities (lines, blocks, ruled boxes) and spatial relations,
populate a small relational schema, then extract fields with a SQL subset
driven directly or through a natural-language front end with saveable,
replayable workflows bound to layout templates.
"""

from .config import DEFAULT_CONFIG, EngineConfig
from .engine import DocEngine, DocumentRecord
from .entities import (AdjacencyRow, DocumentEntities, KeyValueRow, Line,
                       LineBelowRow, TextBlock, TypedWordRow, build_entities,
                       cluster_blocks, cluster_lines, compute_adjacency,
                       extract_key_values, line_below_word, tag_data_types)
from .ingest import (BinaryRaster, Raster, RawDocument, Word, binarize,
                     ingest_document, load_raster, parse_ocr_words,
                     words_to_jsonwords)
from .lexicons import Lexicons, builtin_lexicons, canonicalize_alias
from .nl import (Intent, NormalizedUtterance, Response, TemplateId,
                 classify_intent, compose_sql, handle_utterance, map_table,
                 map_template, recognize_cond_values)
from .query import (QueryAST, evaluate, execute_and_stage, parse_sql,
                    print_sql)
from .raster_ops import (BoxRegion, ConnectedComponent, connected_components,
                         detect_boxes, erode)
from .relstore import Relation, RelationDB, populate
from .session import SessionState
from .templates import (TemplateRegistry, TemplateSignature,
                        compute_signature, match_template, register_template,
                        signature_score)
from .workflow import (ApplyOutcome, Workflow, WorkflowRegistry, WorkflowStep,
                       apply_workflow, clear_workflow, record_step,
                       save_workflow)

__version__ = "0.1.0"
