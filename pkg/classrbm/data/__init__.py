"""
Categorical schema handling and dataset utilities.
"""

from classrbm.data.schema import (
    BUNDLED_SCHEMA, CategoricalSchema, binarize, load_bundled_schema, load_schema, schema_from_dict
)
from classrbm.data.datasets import (
    Dataset, Example, bayes_predict, export_csv, load_csv, load_inputs, metadata_path, read_metadata, split,
    synth_generate
)

__all__ = [
    'BUNDLED_SCHEMA', 'CategoricalSchema', 'binarize', 'load_bundled_schema', 'load_schema',
    'schema_from_dict', 'Dataset', 'Example', 'bayes_predict', 'export_csv', 'load_csv', 'load_inputs',
    'metadata_path', 'read_metadata', 'split', 'synth_generate'
]
