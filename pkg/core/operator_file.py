"""
Plain-text operator files

Three formats are understood, selected by the header line:

    format = "qqo-tensor/1"     b[m][l][k] = <decimal>   (omitted entries are 0)
    format = "qqo-abc/1"        a = ..., b = ..., c = ...
    format = "qqo-diagonal/1"   b[i][k] = <decimal>      (omitted entries are 0)

Indices are 1-based. Blank lines and text after '#' are ignored.
"""
from __future__ import annotations
import os
import re
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .families import AbcParams, DiagonalQO, abc_to_tensor, diagonal_to_tensor
from .models import QqoTensor
from .utils import get_operator_hash

# Configure logging
logger = logging.getLogger(__name__)

FORMAT_TENSOR = "qqo-tensor/1"
FORMAT_ABC = "qqo-abc/1"
FORMAT_DIAGONAL = "qqo-diagonal/1"
FORMATS = (FORMAT_TENSOR, FORMAT_ABC, FORMAT_DIAGONAL)


class OperatorFileError(Exception):
    """Base exception for operator file handling"""
    pass


class OperatorParseError(OperatorFileError):
    """Malformed operator file; carries the offending line number and key"""

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.key = key
        location = []
        if line is not None:
            location.append(f"line {line}")
        if key is not None:
            location.append(f"key '{key}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


@dataclass
class ParsedOperator:
    """An operator file after parsing, with the tensor every format reduces to"""
    format: str
    tensor: QqoTensor
    sha256: str
    path: Optional[str] = None
    abc: Optional[AbcParams] = None
    diagonal: Optional[DiagonalQO] = None


class OperatorFileParser:
    """
    Line-oriented parser for the operator file formats
    """

    LINE_PATTERN = re.compile(r"^(?P<key>[^=\s]+)\s*=\s*(?P<value>.+?)\s*$")
    HEADER_PATTERN = re.compile(r'^"(?P<name>[^"]+)"$')
    TENSOR_KEY = re.compile(r"^b\[(\d)\]\[(\d)\]\[(\d)\]$")
    DIAGONAL_KEY = re.compile(r"^b\[(\d)\]\[(\d)\]$")
    ABC_KEYS = ("a", "b", "c")

    @staticmethod
    def _entries(text: str) -> List[Tuple[int, str, str]]:
        """(line number, key, raw value) for every non-blank line"""
        entries = []
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            match = OperatorFileParser.LINE_PATTERN.match(line)
            if not match:
                raise OperatorParseError("expected 'key = value'", line=number)
            entries.append((number, match.group("key"), match.group("value")))
        return entries

    @staticmethod
    def _number(value: str, line: int, key: str) -> float:
        try:
            number = float(value)
        except ValueError:
            raise OperatorParseError(f"'{value}' is not a decimal number", line=line, key=key)
        if not math.isfinite(number):
            raise OperatorParseError(f"value must be finite, got '{value}'", line=line, key=key)
        return number

    @staticmethod
    def _indices(pattern: re.Pattern, key: str, line: int, count: int) -> Tuple[int, ...]:
        match = pattern.match(key)
        if not match:
            raise OperatorParseError("unknown key", line=line, key=key)
        indices = tuple(int(g) for g in match.groups())
        if len(indices) != count or not all(i in (1, 2, 3) for i in indices):
            raise OperatorParseError("indices must be 1, 2 or 3", line=line, key=key)
        return indices

    @classmethod
    def parse(cls, text: str, path: Optional[str] = None) -> ParsedOperator:
        """
        Parse operator file text

        Args:
            text: File contents
            path: Optional origin recorded in the result

        Returns:
            ParsedOperator

        Raises:
            OperatorParseError: On a missing header, unknown format or key,
                duplicate key or non-numeric value
        """
        entries = cls._entries(text)
        if not entries:
            raise OperatorParseError("file is empty")

        line, key, value = entries[0]
        header = cls.HEADER_PATTERN.match(value)
        if key != "format" or not header:
            raise OperatorParseError('first entry must be format = "<name>"', line=line, key=key)
        name = header.group("name")
        if name not in FORMATS:
            raise OperatorParseError(f"unknown format '{name}'", line=line, key=key)

        seen: Dict[str, int] = {}
        for line, key, _ in entries[1:]:
            if key in seen:
                raise OperatorParseError(f"duplicate key (first on line {seen[key]})", line=line, key=key)
            seen[key] = line

        body = entries[1:]
        sha = get_operator_hash(text)
        if name == FORMAT_TENSOR:
            values = {
                cls._indices(cls.TENSOR_KEY, key, line, 3): cls._number(value, line, key)
                for line, key, value in body
            }
            result = ParsedOperator(name, QqoTensor.from_entries(values), sha, path)
        elif name == FORMAT_DIAGONAL:
            values = {
                cls._indices(cls.DIAGONAL_KEY, key, line, 2): cls._number(value, line, key)
                for line, key, value in body
            }
            diagonal = DiagonalQO.from_entries(values)
            result = ParsedOperator(name, diagonal_to_tensor(diagonal), sha, path, diagonal=diagonal)
        else:
            params = {}
            for line, key, value in body:
                if key not in cls.ABC_KEYS:
                    raise OperatorParseError("unknown key", line=line, key=key)
                params[key] = cls._number(value, line, key)
            for key in cls.ABC_KEYS:
                if key not in params:
                    raise OperatorParseError("missing parameter", key=key)
            abc = AbcParams(**params)
            result = ParsedOperator(name, abc_to_tensor(abc), sha, path, abc=abc)

        logger.debug("Parsed %s operator (%d entries)", name, len(body))
        return result


def read_operator_file(path: Union[str, Path]) -> ParsedOperator:
    """
    Read and parse an operator file

    Raises:
        OperatorFileError: If the file cannot be read
        OperatorParseError: If it is malformed
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise OperatorFileError(f"Cannot read operator file {path}: {e}")
    return OperatorFileParser.parse(text, path=str(path))


def _header(name: str) -> str:
    return f'format = "{name}"\n'


def format_tensor(t: QqoTensor) -> str:
    """All 27 entries in lexicographic (m, l, k) order"""
    lines = [_header(FORMAT_TENSOR)]
    for m in range(1, 4):
        for l in range(1, 4):
            for k in range(1, 4):
                lines.append(f"b[{m}][{l}][{k}] = {t.entry(m, l, k)!r}\n")
    return "".join(lines)


def format_diagonal(d: DiagonalQO) -> str:
    lines = [_header(FORMAT_DIAGONAL)]
    for i in range(1, 4):
        for k in range(1, 4):
            lines.append(f"b[{i}][{k}] = {float(d.b[i - 1, k - 1])!r}\n")
    return "".join(lines)


def format_abc(p: AbcParams) -> str:
    return _header(FORMAT_ABC) + f"a = {p.a!r}\nb = {p.b!r}\nc = {p.c!r}\n"


def write_operator_file(path: Union[str, Path], content: str) -> None:
    """
    Write formatted operator text through a temporary file and an atomic replace

    Parent directories are created as needed.

    Raises:
        OperatorFileError: If the file cannot be written
    """
    path = Path(path)
    tmp_path = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp_path.write_text(content, encoding="utf-8")
        os.replace(tmp_path, path)
    except OSError as e:
        if tmp_path.exists():
            tmp_path.unlink()
        logger.warning("Failed to write operator file %s: %s", path, e)
        raise OperatorFileError(f"Cannot write operator file {path}: {e}")
