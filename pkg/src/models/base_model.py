"""
Base model class for all domain records.
"""

from enum import Enum
from typing import Dict, Any, ClassVar, List

import numpy as np


def to_plain(value: Any) -> Any:
    """Convert numpy values, enums and nested records to JSON-compatible data"""
    if isinstance(value, BaseModel):
        return value.to_dict()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {k: to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    return value


class BaseModel:
    """Base model class with common functionality for all records"""

    # Class variables to be overridden by subclasses
    _fields: ClassVar[List[str]] = []
    _array_fields: ClassVar[List[str]] = []

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert the record to a dictionary for file storage

        Returns:
            Dictionary representation of the record, arrays as nested lists
        """
        return {field: to_plain(getattr(self, field)) for field in self._fields if hasattr(self, field)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'BaseModel':
        """
        Create a record from a dictionary

        Args:
            data: Dictionary containing record data

        Returns:
            Record object
        """
        # Filter the data to only include fields defined in _fields
        filtered_data = {k: v for k, v in data.items() if k in cls._fields}
        for field in cls._array_fields:
            if filtered_data.get(field) is not None:
                filtered_data[field] = np.asarray(filtered_data[field], dtype=float)
        return cls(**filtered_data)
