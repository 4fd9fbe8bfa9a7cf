import json
from pathlib import Path

import jsonschema
import pytest

from covqec.channels import channel_to_dict, dephasing_channel, erasure_channel
from covqec.codes import code_to_descriptor, thermodynamic_code
from covqec.schemas import NAMES, SchemaError, load, validate

DOCS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


@pytest.mark.parametrize("name", NAMES)
def test_docs_copy_identical(name):
    assert json.loads((DOCS / f"{name}.json").read_text()) == load(name)


@pytest.mark.parametrize("name", NAMES)
def test_schemas_are_valid_draft(name):
    schema = load(name)
    jsonschema.validators.validator_for(schema).check_schema(schema)


def test_descriptors_validate():
    validate(channel_to_dict(erasure_channel((2, 2))), "channel")
    validate(channel_to_dict(dephasing_channel(0.1, 2)), "channel")
    validate(code_to_descriptor(*thermodynamic_code(8, 2, 0.5)), "code")


def test_rejections():
    with pytest.raises(SchemaError, match="channel"):
        validate({"type": "erasure"}, "channel")
    with pytest.raises(SchemaError):
        validate({"type": "dephasing", "dims": [2], "p": 2.0}, "channel")
    with pytest.raises(KeyError):
        load("nonexistent")
