"""
Input Validator
---------------
Strict key validation of configuration dictionaries against dataclass schemas, and
shape checks for the JSON documents read by the CLI.
"""

from dataclasses import fields, is_dataclass
from typing import Any, Dict, Iterable, Set, Type, cast, get_type_hints


def validate_keys(
    raw_config: Dict[str, Any], data_class: Type[Any], path: str = ""
) -> None:
    """
    Recursively validates keys against a Dataclass schema.
    Uses get_type_hints() to resolve string annotations (Postponed Evaluation).
    """
    try:
        type_hints = get_type_hints(data_class)
    except Exception:
        type_hints = {f.name: f.type for f in fields(data_class)}

    allowed_fields: Set[str] = {f.name for f in fields(data_class)}
    unknown_keys = set(raw_config.keys()) - allowed_fields

    if unknown_keys:
        error_path = path if path else "root"
        raise ValueError(
            f"Config Error: Unknown keys detected at '{error_path}': {sorted(unknown_keys)}. "
            f"Allowed keys: {sorted(allowed_fields)}"
        )

    for field in fields(data_class):
        value = raw_config.get(field.name)
        resolved_type = type_hints.get(field.name)
        if is_dataclass(resolved_type) and isinstance(value, dict):
            new_path = f"{path}.{field.name}" if path else field.name
            validate_keys(value, cast(Type[Any], resolved_type), path=new_path)


def require_keys(
    doc: Dict[str, Any], required: Iterable[str], optional: Iterable[str] = (), path: str = "root"
) -> None:
    """Reject missing and unknown keys in an input document."""
    if not isinstance(doc, dict):
        raise ValueError(f"Input Error: expected an object at '{path}', got {type(doc).__name__}")
    required = set(required)
    allowed = required | set(optional)
    missing = required - set(doc)
    if missing:
        raise ValueError(f"Input Error: Missing keys at '{path}': {sorted(missing)}")
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(
            f"Input Error: Unknown keys detected at '{path}': {sorted(unknown)}. "
            f"Allowed keys: {sorted(allowed)}"
        )
