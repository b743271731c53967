"""Relational view.

Each class gets an entity table. A class with subclasses chains to its
subtables through an ``SC<Class>`` link column and a ``DIS<Sub...>``
discriminator naming the subtable that continues the row. Functional object
properties become ``REF<prop>`` columns on the domain table; the others become
association tables. Individuals become one row per level of their class chain
with keys ``r3``, ``r'3``, ``r''3``...

Queries and constraints are built as small condition trees, rendered to SQL
text and evaluated directly over the in-memory rows. The evaluator uses
two-valued comparisons: ``NULL != x`` is true and ``NULL = x`` is false.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Union

from .model import OWL_THING, OntologyModel, PropAssertion, TypeAssertion, is_datatype
from .ops import ChangeDomain, DeleteClass, UnsupportedOp
from .ttl import Iri, Literal

KEY_TYPE = "VARCHAR(64)"
THING = "Thing"


class PopulationError(Exception):
    pass


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # id | sc | dis | ref | data
    nullable: bool = True
    target: str | None = None
    choices: tuple[str, ...] = ()


@dataclass
class TableSchema:
    name: str
    columns: list[Column]
    primary_key: tuple[str, ...]
    foreign_keys: list[tuple[str, str]] = field(default_factory=list)
    cls: str | None = None
    prop: str | None = None

    def column(self, kind: str) -> Column | None:
        for c in self.columns:
            if c.kind == kind:
                return c
        return None

    @property
    def id_col(self) -> str:
        return self.primary_key[0]


@dataclass
class RelationalSchema:
    tables: dict[str, TableSchema] = field(default_factory=dict)
    parent: dict[str, str | None] = field(default_factory=dict)
    subclasses: dict[str, list[str]] = field(default_factory=dict)
    # property -> (table, column) for REF and data columns
    columns_of: dict[str, tuple[str, str]] = field(default_factory=dict)
    # property -> association table
    association_of: dict[str, str] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def chain(self, cls: str) -> list[str]:
        """Tables from the root down to ``cls``."""
        out = []
        current: str | None = cls
        while current is not None:
            out.append(current)
            current = self.parent.get(current)
        return out[::-1]

    def by_discriminator(self, value: str) -> str:
        for name in self.parent:
            if discriminator(name) == value:
                return name
        raise KeyError(value)


def discriminator(cls: str) -> str:
    return cls.lower()


def level_key(root: str, level: int) -> str:
    """``r3`` at level 2 is ``r''3``: primes go before any trailing digits."""
    stem = root.rstrip("0123456789")
    return stem + "'" * level + root[len(stem):]


def root_key(key: str) -> str:
    return key.replace("'", "")


def key_level(key: str) -> int:
    return key.count("'")


def sql_key(key: str) -> str:
    level = key_level(key)
    return f"{root_key(key)}_{level}" if level else key


def _assoc_name(prop: str, taken) -> str:
    name = prop[:1].upper() + prop[1:]
    while name in taken:
        name += "Link"
    return name


# --- schema ----------------------------------------------------------------


def build_schema(m: OntologyModel) -> RelationalSchema:
    rs = RelationalSchema()
    for c in m.classes:
        sup = m.primary_super(c)
        rs.parent[c.local] = sup.local if sup else None
        rs.subclasses[c.local] = []
    for c in m.classes:
        for child in m.children(c):
            if m.primary_super(child) == c:
                rs.subclasses[c.local].append(child.local)

    for c in m.classes:
        name = c.local
        cols = [Column(f"ID{name}", "id", nullable=False)]
        subs = rs.subclasses[name]
        if subs:
            cols.append(Column(f"SC{name}", "sc", choices=tuple(subs)))
            cols.append(Column(f"DIS{''.join(subs)}", "dis", choices=tuple(subs)))
        rs.tables[name] = TableSchema(name, cols, (cols[0].name,), cls=name)

    for p in m.properties.values():
        domain = p.domain.local if p.domain is not None and p.domain in m.classes else None
        rng = p.range.local if p.range is not None and p.range in m.classes else None
        if p.functional and domain is not None:
            table = rs.tables[domain]
            if is_datatype(p.range) or p.datatype:
                col = Column(p.name.local, "data")
            else:
                col = Column(f"REF{p.name.local}", "ref", target=rng)
                if rng is not None:
                    table.foreign_keys.append((col.name, rng))
            table.columns.append(col)
            rs.columns_of[p.name.local] = (domain, col.name)
            continue
        name = _assoc_name(p.name.local, rs.tables)
        left = Column(f"ID{domain or THING}", "ref", nullable=False, target=domain)
        if is_datatype(p.range) or p.datatype:
            right = Column("value", "data", nullable=False)
        else:
            right_name = f"ID{rng or THING}"
            if right_name == left.name:
                right_name += "Target"
            right = Column(right_name, "ref", nullable=False, target=rng)
        table = TableSchema(name, [left, right], (left.name, right.name), prop=p.name.local)
        table.foreign_keys = [(c.name, c.target) for c in (left, right) if c.target]
        rs.tables[name] = table
        rs.association_of[p.name.local] = name

    done = set()
    for c in m.classes.values():
        for d in c.disjoint_with:
            pair = frozenset((c.name, d))
            if d in m.classes and pair not in done:
                done.add(pair)
                a, b = c.name.local, d.local
                rs.notes.append(
                    f"-- owl:disjointWith {a} {b} is enforced by a trigger (not executed):\n"
                    f"-- CREATE TRIGGER disjoint_{a}_{b} BEFORE INSERT ON {a} FOR EACH ROW\n"
                    f"--   reject the row when the same individual already has a {b} row (and symmetrically on {b})"
                )
        for r in c.restrictions:
            cname, prop, target = c.name.local, r.on_property.local, r.target.local
            where = rs.association_of.get(prop) or (rs.columns_of.get(prop) or ("?",))[0]
            rs.notes.append(
                f"-- someValuesFrom restriction on {cname}.{prop} is enforced by a trigger (not executed):\n"
                f"-- CREATE TRIGGER some_{cname}_{prop} BEFORE INSERT ON {cname} FOR EACH ROW\n"
                f"--   require a {prop} value in {where} that chains to a {target} row"
            )
        if c.complete:
            members = [s.local for s in c.supers] + [f"some {r.on_property.local} {r.target.local}" for r in c.restrictions]
            rs.notes.append(
                f"-- {c.name.local} is a defined class (intersection of {', '.join(members)});\n"
                f"-- it could be exposed as a view with INSTEAD OF triggers (not emitted)"
            )
    return rs


def render_ddl(rs: RelationalSchema) -> str:
    out = []
    for t in rs.tables.values():
        lines = []
        for c in t.columns:
            spec = f"{c.name} {KEY_TYPE}"
            if t.cls is not None and c.kind == "id":
                spec += " PRIMARY KEY"
            elif not c.nullable:
                spec += " NOT NULL"
            if c.kind == "ref" and c.target:
                spec += f" REFERENCES {c.target}"
            lines.append(spec)
        if t.cls is None:
            lines.append(f"PRIMARY KEY ({', '.join(t.primary_key)})")
        sc = t.column("sc")
        if sc is not None:
            dis = t.column("dis")
            out.append(f"-- {sc.name} links to the row of the subtable named by {dis.name}")
        out.append(f"CREATE TABLE {t.name}\n(" + ",\n ".join(lines) + ");")
        out.append("")
    out.extend(note + "\n" for note in rs.notes)
    return "\n".join(out)


def emit_ddl(m: OntologyModel) -> tuple[str, RelationalSchema]:
    rs = build_schema(m)
    return render_ddl(rs), rs


# --- rows ------------------------------------------------------------------


Row = dict


@dataclass
class Database:
    tables: dict[str, list[Row]] = field(default_factory=dict)

    def find(self, table: str, column: str, value) -> Row | None:
        for row in self.tables.get(table, ()):
            if row.get(column) == value:
                return row
        return None


def populate(m: OntologyModel, rs: RelationalSchema) -> Database:
    db = Database({name: [] for name in rs.tables})
    index: dict[tuple[str, str], Row] = {}
    chains: dict[Iri, list[str]] = {}

    for ind in m.individuals:
        cls, _ = m.most_specific(ind)
        if cls is None:
            if m.declared_types.get(ind):
                raise PopulationError(f"{ind.local} has no declared class")
            continue
        if cls.local not in rs.tables:
            raise PopulationError(f"class {cls.local} of {ind.local} has no table")
        chain = rs.chain(cls.local)
        chains[ind] = chain
        for level, table in enumerate(chain):
            t = rs.tables[table]
            row: Row = {c.name: None for c in t.columns}
            row[t.id_col] = level_key(ind.local, level)
            if level + 1 < len(chain):
                row[t.column("sc").name] = level_key(ind.local, level + 1)
                row[t.column("dis").name] = discriminator(chain[level + 1])
            db.tables[table].append(row)
            index[table, ind.local] = row

    def key_at(ind: Iri, table: str | None) -> str:
        if table is None:
            return ind.local
        chain = chains.get(ind)
        if chain is None or table not in chain:
            raise PopulationError(f"{ind.local} has no {table} row")
        return level_key(ind.local, chain.index(table))

    for f in m.prop_assertions():
        p = f.property.local
        value = f.object.value if isinstance(f.object, Literal) else None
        if p in rs.columns_of:
            table, col = rs.columns_of[p]
            key_at(f.subject, table)
            row = index[table, f.subject.local]
            column = next(c for c in rs.tables[table].columns if c.name == col)
            if column.kind == "ref":
                if isinstance(f.object, Literal):
                    raise PopulationError(f"{p}({f.subject.local}, ...) expects an individual")
                value = key_at(f.object, column.target)
            if row[col] is not None and row[col] != value:
                raise PopulationError(f"{p} is single-valued but {f.subject.local} has several values")
            row[col] = value
        elif p in rs.association_of:
            t = rs.tables[rs.association_of[p]]
            left, right = t.columns
            lkey = key_at(f.subject, left.target)
            if right.kind == "data":
                rkey = value
            elif isinstance(f.object, Literal):
                raise PopulationError(f"{p}({f.subject.local}, ...) expects an individual")
            else:
                rkey = key_at(f.object, right.target)
            row = {left.name: lkey, right.name: rkey}
            if row not in db.tables[t.name]:
                db.tables[t.name].append(row)
        else:
            raise PopulationError(f"property {p} has no column or table")
    return db


def fact_lines(db: Database, rs: RelationalSchema) -> list[str]:
    """Rows rendered as ``Person(r3,r'3,manager,v3) Manager(r'3,,,)``, one line per individual."""
    out = []
    for table, t in rs.tables.items():
        if t.cls is None or rs.parent.get(table) is not None:
            continue
        for row in db.tables[table]:
            parts = []
            current_t, current = t, row
            while True:
                values = ["" if current[c.name] is None else str(current[c.name]) for c in current_t.columns]
                parts.append(f"{current_t.name}({','.join(values)})")
                sc = current_t.column("sc")
                if sc is None or current[sc.name] is None:
                    break
                nxt = rs.by_discriminator(current[current_t.column("dis").name])
                current_t = rs.tables[nxt]
                current = db.find(nxt, current_t.id_col, current[sc.name])
            out.append(" ".join(parts))
    return out


def render_inserts(db: Database, rs: RelationalSchema) -> str:
    out = []
    for table, rows in db.tables.items():
        t = rs.tables[table]
        names = [c.name for c in t.columns]
        for row in rows:
            values = []
            for c in t.columns:
                v = row[c.name]
                if v is None:
                    values.append("NULL")
                elif isinstance(v, int) and c.kind == "data":
                    values.append(str(v))
                elif c.kind in ("id", "sc", "ref"):
                    values.append(f"'{sql_key(str(v))}'")
                else:
                    values.append("'" + str(v).replace("'", "''") + "'")
            out.append(f"INSERT INTO {table} ({', '.join(names)}) VALUES ({', '.join(values)});")
    return "\n".join(out) + ("\n" if out else "")


def reconstruct_facts(db: Database, rs: RelationalSchema) -> set[tuple]:
    """Facts recovered from the rows: leaf class per individual plus property values."""
    facts: set[tuple] = set()
    for table, t in rs.tables.items():
        if t.cls is None:
            continue
        sc = t.column("sc")
        for row in db.tables[table]:
            if sc is None or row[sc.name] is None:
                facts.add(("type", root_key(row[t.id_col]), table))
    for prop, (table, col) in rs.columns_of.items():
        t = rs.tables[table]
        for row in db.tables[table]:
            v = row[col]
            if v is None:
                continue
            kind = next(c.kind for c in t.columns if c.name == col)
            facts.add(("prop", root_key(row[t.id_col]), prop, root_key(v) if kind == "ref" else v))
    for prop, table in rs.association_of.items():
        left, right = rs.tables[table].columns
        for row in db.tables[table]:
            v = row[right.name]
            facts.add(("prop", root_key(row[left.name]), prop, root_key(v) if right.kind == "ref" else v))
    return facts


def abox_facts(m: OntologyModel) -> set[tuple]:
    out: set[tuple] = set()
    for f in m.abox:
        if isinstance(f, TypeAssertion):
            out.add(("type", f.individual.local, f.cls.local))
        elif isinstance(f, PropAssertion):
            o = f.object.value if isinstance(f.object, Literal) else f.object.local
            out.add(("prop", f.subject.local, f.property.local, o))
    return out


def check_integrity(db: Database, rs: RelationalSchema) -> list[str]:
    problems = []
    for table, t in rs.tables.items():
        seen = set()
        for row in db.tables[table]:
            pk = tuple(row[c] for c in t.primary_key)
            if pk in seen:
                problems.append(f"{table}: duplicate key {pk}")
            seen.add(pk)
            for col, target in t.foreign_keys:
                v = row[col]
                if v is not None and db.find(target, rs.tables[target].id_col, v) is None:
                    problems.append(f"{table}.{col} = {v} has no {target} row")
            sc = t.column("sc")
            if sc is not None and row[sc.name] is not None:
                dis = row[t.column("dis").name]
                try:
                    sub = rs.by_discriminator(dis)
                except KeyError:
                    problems.append(f"{table}: unknown discriminator {dis}")
                    continue
                if db.find(sub, rs.tables[sub].id_col, row[sc.name]) is None:
                    problems.append(f"{table}.{sc.name} = {row[sc.name]} has no {sub} row")
    return problems


# --- conditions ------------------------------------------------------------


@dataclass(frozen=True)
class IsNull:
    col: str


@dataclass(frozen=True)
class NotNull:
    col: str


@dataclass(frozen=True)
class Eq:
    col: str
    value: str


@dataclass(frozen=True)
class Ne:
    col: str
    value: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Select:
    table: str
    where: "Cond | None" = None
    column: str = "*"
    from_kw: str = "FROM"


@dataclass(frozen=True)
class In:
    col: str
    sub: Select


@dataclass(frozen=True)
class NotIn:
    col: str
    sub: Select


Cond = Union[IsNull, NotNull, Eq, Ne, Const, And, Or, In, NotIn]


def negate(c: Cond | None) -> Cond:
    if c is None:
        return Const(False)
    if isinstance(c, IsNull):
        return NotNull(c.col)
    if isinstance(c, NotNull):
        return IsNull(c.col)
    if isinstance(c, Eq):
        return Ne(c.col, c.value)
    if isinstance(c, Ne):
        return Eq(c.col, c.value)
    if isinstance(c, Const):
        return Const(not c.value)
    if isinstance(c, And):
        return disj(*(negate(p) for p in c.parts))
    if isinstance(c, Or):
        return conj(*(negate(p) for p in c.parts))
    if isinstance(c, In):
        return NotIn(c.col, c.sub)
    if isinstance(c, NotIn):
        return In(c.col, c.sub)
    raise TypeError(c)


def conj(*parts: Cond) -> Cond:
    kept = []
    for p in parts:
        if p == Const(False):
            return p
        if p != Const(True):
            kept.append(p)
    if not kept:
        return Const(True)
    return kept[0] if len(kept) == 1 else And(tuple(kept))


def disj(*parts: Cond) -> Cond:
    kept = []
    for p in parts:
        if p == Const(True):
            return p
        if p != Const(False):
            kept.append(p)
    if not kept:
        return Const(False)
    return kept[0] if len(kept) == 1 else Or(tuple(kept))


def render_cond(c: Cond) -> str:
    if isinstance(c, IsNull):
        return f"{c.col} IS NULL"
    if isinstance(c, NotNull):
        return f"{c.col} IS NOT NULL"
    if isinstance(c, Eq):
        return f"{c.col} = {c.value}"
    if isinstance(c, Ne):
        return f"{c.col} != {c.value}"
    if isinstance(c, Const):
        return "1 = 1" if c.value else "1 = 0"
    if isinstance(c, And):
        return " and ".join(f"({render_cond(p)})" if isinstance(p, Or) else render_cond(p) for p in c.parts)
    if isinstance(c, Or):
        return " or ".join(f"({render_cond(p)})" if isinstance(p, And) else render_cond(p) for p in c.parts)
    if isinstance(c, In):
        return f"{c.col} IN ({render_select(c.sub)})"
    if isinstance(c, NotIn):
        return f"{c.col} NOT IN ({render_select(c.sub)})"
    raise TypeError(c)


def render_select(q: Select) -> str:
    text = f"SELECT {q.column} {q.from_kw} {q.table}"
    if q.where is not None:
        text += f" where {render_cond(q.where)}"
    return text


def eval_cond(c: Cond | None, row: Row, db: Database) -> bool:
    if c is None:
        return True
    if isinstance(c, IsNull):
        return row[c.col] is None
    if isinstance(c, NotNull):
        return row[c.col] is not None
    if isinstance(c, Eq):
        return row[c.col] == c.value
    if isinstance(c, Ne):
        return row[c.col] != c.value
    if isinstance(c, Const):
        return c.value
    if isinstance(c, And):
        return all(eval_cond(p, row, db) for p in c.parts)
    if isinstance(c, Or):
        return any(eval_cond(p, row, db) for p in c.parts)
    if isinstance(c, (In, NotIn)):
        values = {r[c.sub.column] for r in select_rows(c.sub, db)}
        found = row[c.col] is not None and row[c.col] in values
        return found if isinstance(c, In) else not found
    raise TypeError(c)


def select_rows(q: Select, db: Database) -> list[Row]:
    return [row for row in db.tables.get(q.table, ()) if eval_cond(q.where, row, db)]


# --- evolution queries -----------------------------------------------------


def reaches(rs: RelationalSchema, table: str, cls: str) -> Cond:
    """Condition on a ``table`` row that holds when the row's chain continues down to ``cls``."""
    chain = rs.chain(cls)
    if table not in chain:
        return Const(cls in rs.chain(table))
    path = chain[chain.index(table):]
    if len(path) == 1:
        return Const(True)
    cond: Cond | None = None
    for upper, lower in reversed(list(zip(path, path[1:]))):
        t = rs.tables[upper]
        step = Eq(t.column("dis").name, discriminator(lower))
        if cond is None:
            cond = step
        else:
            sub = Select(lower, cond, rs.tables[lower].id_col)
            cond = conj(step, In(t.column("sc").name, sub))
    return cond


def _member(rs: RelationalSchema, col: str, table: str | None, cls: str) -> Cond:
    """``col`` holds a key of ``table`` whose chain reaches ``cls``."""
    if table is None:
        table = rs.chain(cls)[0]
        return In(col, Select(table, reaches(rs, table, cls), rs.tables[table].id_col))
    cond = reaches(rs, table, cls)
    if isinstance(cond, Const):
        return cond
    return In(col, Select(table, cond, rs.tables[table].id_col))


def inconsistency_query(op, rs: RelationalSchema) -> Select:
    if isinstance(op, ChangeDomain):
        p, target = op.property.local, op.new_domain.local
        if target not in rs.tables:
            raise UnsupportedOp(f"class {target} has no table")
        if p in rs.columns_of:
            table, col = rs.columns_of[p]
            return Select(table, conj(NotNull(col), negate(reaches(rs, table, target))), from_kw="from")
        if p in rs.association_of:
            table = rs.association_of[p]
            left = rs.tables[table].columns[0]
            return Select(table, negate(_member(rs, left.name, left.target, target)), from_kw="from")
        raise UnsupportedOp(f"property {p} has no column or table")
    if isinstance(op, DeleteClass):
        table = op.cls.local
        if table not in rs.tables:
            raise UnsupportedOp(f"class {table} has no table")
        sc = rs.tables[table].column("sc")
        return Select(table, IsNull(sc.name) if sc is not None else None)
    raise UnsupportedOp(f"unsupported operation {op!r}")


def _schema(m: OntologyModel, rs: RelationalSchema | None) -> RelationalSchema:
    return rs if rs is not None else build_schema(m)


def emit_inconsistency_query(op, m: OntologyModel, rs: RelationalSchema | None = None) -> str:
    """SQL selecting the rows made inconsistent by ``op``.

    ``m`` is the model the relational schema was generated from.
    """
    return render_select(inconsistency_query(op, _schema(m, rs)))


def constraint_cond(op, rs: RelationalSchema) -> tuple[str, Cond]:
    q = inconsistency_query(op, rs)
    return q.table, negate(q.where)


def emit_evolution_constraints(op, m: OntologyModel, rs: RelationalSchema | None = None, name: str | None = None) -> str:
    table, cond = constraint_cond(op, _schema(m, rs))
    label = f" {name}" if name else ""
    return f"ALTER TABLE {table} ADD CONSTRAINT{label} CHECK({render_cond(cond)})"


def violating_rows(db: Database, op, rs: RelationalSchema) -> list[Row]:
    table, cond = constraint_cond(op, rs)
    return [row for row in db.tables.get(table, ()) if not eval_cond(cond, row, db)]


def root_of(db: Database, rs: RelationalSchema, table: str, row: Row) -> str:
    """Walk SC links upward from ``row`` to the root table and return its key."""
    t = rs.tables[table]
    if t.cls is None:
        return root_key(row[t.columns[0].name])
    key = row[t.id_col]
    current = table
    while rs.parent.get(current) is not None:
        up = rs.parent[current]
        parent_row = db.find(up, rs.tables[up].column("sc").name, key)
        if parent_row is None:
            break
        key, current = parent_row[rs.tables[up].id_col], up
    return key


def eval_inconsistency(db: Database, op, m: OntologyModel, rs: RelationalSchema | None = None) -> set[str]:
    rs = _schema(m, rs)
    q = inconsistency_query(op, rs)
    return {root_of(db, rs, q.table, row) for row in select_rows(q, db)}
