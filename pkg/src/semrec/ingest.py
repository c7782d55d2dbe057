"""Rating and concept-annotation ingestion.

Ratings files are comma-separated with the header ``user,item,attribute,score``;
concept files use ``item,concept``.  Lines starting with ``#`` are comments and
paths ending in ``.gz`` are read/written through gzip.
"""

from __future__ import annotations

import csv
import gzip
import io
import logging
import math
import os
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Union

from .errors import LookupFailure, ParseError, ValidationError

log = logging.getLogger(__name__)

Source = Union[str, os.PathLike, bytes, IO[bytes], IO[str]]

DEFAULT_ATTRIBUTE_NAMES = ("subject", "performance", "overall")
RATINGS_HEADER = ("user", "item", "attribute", "score")
CONCEPTS_HEADER = ("item", "concept")


@dataclass(frozen=True)
class RatingScale:
    low: float = 1
    high: float = 5
    integral: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.low) and math.isfinite(self.high)) or self.low > self.high:
            raise ValueError(f"invalid rating scale [{self.low}, {self.high}]")

    def contains(self, score: float) -> bool:
        if not self.low <= score <= self.high:
            return False
        return not self.integral or float(score).is_integer()

    def clamp(self, score: float) -> float:
        return min(self.high, max(self.low, score))

    def format(self, score: float) -> str:
        if self.integral and float(score).is_integer():
            return str(int(score))
        return repr(float(score))

    def __str__(self) -> str:
        kind = "integer" if self.integral else "real"
        return f"{kind} [{self.format(self.low)}, {self.format(self.high)}]"


@dataclass(frozen=True, order=True)
class RatingRecord:
    user: str
    item: str
    attribute: int
    score: float


class RatingsStore:
    """Multi-attribute user x item ratings indexed both by user and by item.

    Instances are treated as immutable once built; the accessor methods hand
    out read-only views of the internal dictionaries, so callers must not
    mutate what they get back.
    """

    def __init__(
        self,
        records: Iterable[RatingRecord] = (),
        scale: RatingScale | None = None,
        n_attributes: int = 3,
        attribute_names: Iterable[str] | None = None,
    ):
        if n_attributes < 1:
            raise ValueError("n_attributes must be >= 1")
        self.scale = scale or RatingScale()
        self.n_attributes = n_attributes
        if attribute_names is None:
            names = list(DEFAULT_ATTRIBUTE_NAMES[:n_attributes])
            names += [f"attr{a}" for a in range(len(names) + 1, n_attributes + 1)]
        else:
            names = list(attribute_names)
            if len(names) != n_attributes:
                raise ValueError(f"expected {n_attributes} attribute names, got {len(names)}")
        self.attribute_names = tuple(names)

        # attribute -> user -> item -> score and attribute -> item -> user -> score
        self._by_user: dict[int, dict[str, dict[str, float]]] = {a: {} for a in self.attributes}
        self._by_item: dict[int, dict[str, dict[str, float]]] = {a: {} for a in self.attributes}
        self._users: set[str] = set()
        self._items: set[str] = set()
        self.duplicates = 0

        for rec in records:
            self._insert(rec)
        self._means = {
            (user, a): sum(scores.values()) / len(scores)
            for a, users in self._by_user.items()
            for user, scores in users.items()
        }

    def _insert(self, rec: RatingRecord, line: int | None = None, source: str | None = None):
        if not 1 <= rec.attribute <= self.n_attributes:
            raise ValidationError(
                f"attribute {rec.attribute} outside [1..{self.n_attributes}]", line, source
            )
        if not self.scale.contains(rec.score):
            raise ValidationError(f"score {rec.score:g} outside scale {self.scale}", line, source)
        row = self._by_user[rec.attribute].setdefault(rec.user, {})
        if rec.item in row:
            self.duplicates += 1
        row[rec.item] = float(rec.score)
        self._by_item[rec.attribute].setdefault(rec.item, {})[rec.user] = float(rec.score)
        self._users.add(rec.user)
        self._items.add(rec.item)

    @classmethod
    def _from_lines(cls, rows, scale, n_attributes, attribute_names, source_name):
        store = cls(scale=scale, n_attributes=n_attributes, attribute_names=attribute_names)
        for lineno, rec in rows:
            store._insert(rec, lineno, source_name)
        store._means = {
            (user, a): sum(scores.values()) / len(scores)
            for a, users in store._by_user.items()
            for user, scores in users.items()
        }
        return store

    @property
    def attributes(self) -> range:
        return range(1, self.n_attributes + 1)

    @property
    def users(self) -> list[str]:
        return sorted(self._users)

    @property
    def items(self) -> list[str]:
        return sorted(self._items)

    def __len__(self) -> int:
        return sum(len(r) for users in self._by_user.values() for r in users.values())

    def __iter__(self) -> Iterator[RatingRecord]:
        for a in self.attributes:
            for user, row in self._by_user[a].items():
                for item, score in row.items():
                    yield RatingRecord(user, item, a, score)

    def records(self) -> list[RatingRecord]:
        """All records in canonical (user, item, attribute) order."""
        return sorted(self)

    def has_user(self, user: str) -> bool:
        return user in self._users

    def has_item(self, item: str) -> bool:
        return item in self._items

    def check_attribute(self, attribute: int) -> None:
        if attribute not in self.attributes:
            raise ValueError(f"attribute {attribute} outside [1..{self.n_attributes}]")

    def user_ratings(self, user: str, attribute: int) -> Mapping[str, float]:
        """item -> score for one user on one attribute."""
        if user not in self._users:
            raise LookupFailure(f"unknown user {user!r}")
        return self._by_user[attribute].get(user, {})

    def item_ratings(self, item: str, attribute: int) -> Mapping[str, float]:
        """user -> score for one item on one attribute."""
        if item not in self._items:
            raise LookupFailure(f"unknown item {item!r}")
        return self._by_item[attribute].get(item, {})

    def rating(self, user: str, item: str, attribute: int) -> float | None:
        return self._by_user[attribute].get(user, {}).get(item)

    def mean(self, user: str, attribute: int) -> float:
        """Average of every score ``user`` gave on ``attribute``."""
        try:
            return self._means[user, attribute]
        except KeyError:
            raise LookupFailure(f"user {user!r} has no ratings on attribute {attribute}") from None

    def by_user(self, user: str) -> list[RatingRecord]:
        return sorted(
            RatingRecord(user, item, a, s)
            for a in self.attributes
            for item, s in self._by_user[a].get(user, {}).items()
        )

    def by_item(self, item: str) -> list[RatingRecord]:
        return sorted(
            RatingRecord(user, item, a, s)
            for a in self.attributes
            for user, s in self._by_item[a].get(item, {}).items()
        )

    def without(self, pairs: Iterable[tuple[str, str]]) -> "RatingsStore":
        """Copy of the store with every rating of the given (user, item) pairs removed."""
        drop = set(pairs)
        return RatingsStore(
            (r for r in self if (r.user, r.item) not in drop),
            scale=self.scale,
            n_attributes=self.n_attributes,
            attribute_names=self.attribute_names,
        )

    def same_records(self, other: "RatingsStore") -> bool:
        return self.records() == other.records()

    def __repr__(self) -> str:
        return (
            f"RatingsStore(users={len(self._users)}, items={len(self._items)}, "
            f"records={len(self)}, K={self.n_attributes})"
        )


@dataclass
class ConceptCatalog:
    """item -> frozen set of concept tokens."""

    concepts: dict[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        self.concepts = {k: frozenset(v) for k, v in self.concepts.items()}
        empty = [k for k, v in self.concepts.items() if not v]
        if empty:
            raise ValueError(f"items without concepts: {sorted(empty)[:5]}")

    def __contains__(self, item: object) -> bool:
        return item in self.concepts

    def __len__(self) -> int:
        return len(self.concepts)

    def __getitem__(self, item: str) -> frozenset[str]:
        return self.concepts[item]

    def get(self, item: str, default=None):
        return self.concepts.get(item, default)

    @property
    def items(self) -> list[str]:
        return sorted(self.concepts)


# -- reading -----------------------------------------------------------------


def _open_text(source: Source) -> tuple[IO[str], str | None, bool]:
    """Return (text stream, display name, should_close)."""
    if isinstance(source, (str, os.PathLike)):
        path = Path(source)
        if path.suffix == ".gz":
            return gzip.open(path, "rt", encoding="utf-8", newline=""), str(path), True
        return open(path, "r", encoding="utf-8", newline=""), str(path), True
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    if isinstance(source, io.TextIOBase):
        return source, getattr(source, "name", None), False
    # binary stream; sniff gzip magic
    raw = source.read()
    if isinstance(raw, str):
        return io.StringIO(raw), None, True
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return io.StringIO(raw.decode("utf-8")), getattr(source, "name", None), True


def _data_rows(stream: IO[str], header: tuple[str, ...], name: str | None):
    """Yield (line number, fields) skipping comments, blanks and the header."""
    seen_data = False
    for lineno, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            fields = next(csv.reader([stripped]))
        except csv.Error as exc:
            raise ParseError(str(exc), line=lineno, source=name) from None
        fields = [f.strip() for f in fields]
        if not seen_data:
            seen_data = True
            if tuple(f.lower() for f in fields) == header:
                continue
        yield lineno, fields


def parse_ratings(
    source: Source,
    scale: RatingScale | None = None,
    n_attributes: int = 3,
    attribute_names: Iterable[str] | None = None,
) -> RatingsStore:
    """Parse a ratings file into a :class:`RatingsStore`.

    Duplicate (user, item, attribute) keys keep the last value seen; the number
    of overwritten records is available as ``store.duplicates``.
    """
    stream, name, close = _open_text(source)
    try:

        def rows():
            for lineno, fields in _data_rows(stream, RATINGS_HEADER, name):
                if len(fields) != 4:
                    raise ParseError(
                        f"expected 4 fields (user,item,attribute,score), got {len(fields)}",
                        line=lineno,
                        source=name,
                    )
                user, item, attr, score = fields
                if not user or not item:
                    raise ParseError("empty user or item id", line=lineno, source=name)
                try:
                    attribute = int(attr)
                except ValueError:
                    raise ParseError(f"non-integer attribute {attr!r}", line=lineno, source=name) from None
                try:
                    value = float(score)
                except ValueError:
                    raise ParseError(f"non-numeric score {score!r}", line=lineno, source=name) from None
                if not math.isfinite(value):
                    raise ParseError(f"non-finite score {score!r}", line=lineno, source=name)
                yield lineno, RatingRecord(user, item, attribute, value)

        store = RatingsStore._from_lines(rows(), scale, n_attributes, attribute_names, name)
    finally:
        if close:
            stream.close()
    if store.duplicates:
        log.warning("%d duplicate rating keys resolved last-write-wins", store.duplicates)
    return store


def parse_concepts(source: Source) -> ConceptCatalog:
    stream, name, close = _open_text(source)
    try:
        acc: dict[str, set[str]] = defaultdict(set)
        for lineno, fields in _data_rows(stream, CONCEPTS_HEADER, name):
            if len(fields) != 2 or not fields[0] or not fields[1]:
                raise ParseError(
                    f"expected 2 non-empty fields (item,concept), got {fields!r}",
                    line=lineno,
                    source=name,
                )
            acc[fields[0]].add(fields[1])
    finally:
        if close:
            stream.close()
    return ConceptCatalog(dict(acc))


# -- writing -----------------------------------------------------------------


def _open_write(path: str | os.PathLike) -> IO[str]:
    path = Path(path)
    if path.suffix == ".gz":
        # mtime=0 keeps the compressed bytes reproducible
        raw = gzip.GzipFile(path, "wb", mtime=0)
        return io.TextIOWrapper(raw, encoding="utf-8", newline="")
    return open(path, "w", encoding="utf-8", newline="")


def _csv_line(fields: Iterable[object]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(fields)
    return buf.getvalue()


def write_ratings(store: RatingsStore, target: str | os.PathLike | IO[str]) -> None:
    def emit(fh):
        fh.write(_csv_line(RATINGS_HEADER))
        for r in store.records():
            fh.write(_csv_line((r.user, r.item, r.attribute, store.scale.format(r.score))))

    if isinstance(target, (str, os.PathLike)):
        with _open_write(target) as fh:
            emit(fh)
    else:
        emit(target)


def write_concepts(catalog: ConceptCatalog, target: str | os.PathLike | IO[str]) -> None:
    def emit(fh):
        fh.write(_csv_line(CONCEPTS_HEADER))
        for item in catalog.items:
            for concept in sorted(catalog[item]):
                fh.write(_csv_line((item, concept)))

    if isinstance(target, (str, os.PathLike)):
        with _open_write(target) as fh:
            emit(fh)
    else:
        emit(target)


# -- validation --------------------------------------------------------------


@dataclass
class ValidationReport:
    unannotated_items: list[str]
    zero_variance_users: dict[int, list[str]]
    unrated_catalog_items: list[str]
    n_users: int
    n_items: int
    n_records: int
    n_catalog_items: int
    duplicates: int

    @property
    def annotation_coverage(self) -> float:
        """Fraction of rated items that carry concept annotations."""
        if not self.n_items:
            return 1.0
        return 1.0 - len(self.unannotated_items) / self.n_items

    @property
    def ok(self) -> bool:
        return not self.unannotated_items and not any(self.zero_variance_users.values())

    def summary(self) -> str:
        lines = [
            f"users={self.n_users} items={self.n_items} records={self.n_records} "
            f"catalog_items={self.n_catalog_items} duplicates={self.duplicates}",
            f"annotation coverage: {self.annotation_coverage:.4f}",
            f"unannotated items: {len(self.unannotated_items)}"
            + (f" ({', '.join(self.unannotated_items[:10])}{' ...' if len(self.unannotated_items) > 10 else ''})"
               if self.unannotated_items else ""),
        ]
        for a, users in sorted(self.zero_variance_users.items()):
            lines.append(f"zero-variance users on attribute {a}: {len(users)}")
        if self.unrated_catalog_items:
            lines.append(f"annotated but unrated items: {len(self.unrated_catalog_items)}")
        return "\n".join(lines)


def validate(store: RatingsStore, catalog: ConceptCatalog) -> ValidationReport:
    """Report data-quality issues without touching either input."""
    rated = set(store.items)
    zero_var: dict[int, list[str]] = {}
    for a in store.attributes:
        flat = []
        for user in store.users:
            scores = store.user_ratings(user, a)
            if scores and max(scores.values()) == min(scores.values()):
                flat.append(user)
        zero_var[a] = flat
    return ValidationReport(
        unannotated_items=sorted(rated - set(catalog.concepts)),
        zero_variance_users=zero_var,
        unrated_catalog_items=sorted(set(catalog.concepts) - rated),
        n_users=len(store.users),
        n_items=len(rated),
        n_records=len(store),
        n_catalog_items=len(catalog),
        duplicates=store.duplicates,
    )
