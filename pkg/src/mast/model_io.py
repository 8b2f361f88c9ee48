"""Model persistence: a native JSON document with exact round-trip, and XDSL XML.

The native document stores the full diagram (probabilities in canonical
column order) plus, for staff-training models, the factor parameters that
generated it; loading re-derives the CPT from those parameters and refuses a
document whose stored table disagrees (a tampered or hand-edited file).

The XDSL side emits the decision-network XML dialect used by graphical
editors: a ``smile`` root, one ``cpt`` element per chance node and one
``utility`` element per utility node, probabilities flattened with the node's
own states varying fastest. Display labels, numeric state values, and any
ids that had to be sanitized are carried in a ``genie`` extension block so
our own files round-trip exactly.
"""

from __future__ import annotations

import json
import re
import warnings
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .diagram import (
    ChanceNode,
    CptTable,
    InfluenceDiagram,
    OutcomeScale,
    UtilityNode,
    validate,
)
from .model import MastModel, RiskFactor, assemble_model

FORMAT_VERSION = "1"
NATIVE_EXTENSION = ".mast.json"
XDSL_EXTENSION = ".xdsl"


class ModelFormatError(Exception):
    """A document could not be parsed, or fails validation or consistency checks."""


class XdslImportWarning(UserWarning):
    """Raised via warnings.warn for ignored foreign XDSL content."""


@dataclass(frozen=True)
class ModelDocument:
    """Parsed native document: the diagram plus the optional model parameters."""

    format_version: str
    diagram: InfluenceDiagram
    mast: MastModel | None = None
    evidence: dict[str, str] | None = None

    @property
    def model_or_diagram(self) -> MastModel | InfluenceDiagram:
        return self.mast if self.mast is not None else self.diagram


def _require_valid(diagram: InfluenceDiagram, context: str) -> None:
    violations = validate(diagram)
    if violations:
        report = "; ".join(str(v) for v in violations)
        raise ModelFormatError(f"{context}: {report}")


# --- native JSON format --------------------------------------------------------

def _chance_to_json(node: ChanceNode) -> dict:
    payload: dict = {
        "id": node.id,
        "label": node.label,
        "states": list(node.scale.states),
    }
    if node.scale.numeric_values is not None:
        payload["numeric_values"] = {s: node.scale.numeric_values[s] for s in node.scale.states}
    payload["parents"] = list(node.parents)
    if node.parents:
        payload["cpt"] = [list(col) for col in node.cpt.columns]
    else:
        payload["prior"] = {s: node.prior[s] for s in node.scale.states}
    return payload


def _diagram_to_json(diagram: InfluenceDiagram) -> dict:
    return {
        "chance_nodes": [_chance_to_json(n) for n in diagram.chance_nodes],
        "utility_nodes": [
            {
                "id": u.id,
                "label": u.label,
                "parents": list(u.parents),
                "utilities": list(u.utilities),
            }
            for u in diagram.utility_nodes
        ],
    }


def save_model(
    model: MastModel | InfluenceDiagram,
    destination: str | Path | None = None,
    *,
    evidence: Mapping[str, str] | None = None,
) -> bytes:
    """Serialize to the native document; refuses diagrams that fail validation.

    Returns the document bytes and, when ``destination`` is given, writes them
    there as well.
    """
    if isinstance(model, MastModel):
        diagram = model.diagram
    else:
        diagram = model
    violations = validate(diagram)
    if violations:
        raise ValueError(
            "refusing to save an invalid diagram: " + "; ".join(str(v) for v in violations))

    document: dict = {
        "format": "mast-model",
        "format_version": FORMAT_VERSION,
        "diagram": _diagram_to_json(diagram),
    }
    if isinstance(model, MastModel):
        extension: dict = {
            "factors": [
                {
                    "id": f.id,
                    "label": f.label,
                    "impact": f.impact,
                    "outcome_values": {s: f.outcome_values[s] for s in f.scale.states},
                    "prior": {s: f.prior[s] for s in f.scale.states},
                }
                for f in model.factors
            ],
            "training_node_id": model.training_node_id,
            "base_cost": model.base_cost,
        }
        if evidence is not None:
            extension["evidence"] = {k: evidence[k] for k in sorted(evidence)}
        document["mast"] = extension
    elif evidence is not None:
        raise ValueError("evidence snapshots are only stored alongside a staff-training model")

    data = (json.dumps(document, indent=2) + "\n").encode("utf-8")
    if destination is not None:
        Path(destination).write_bytes(data)
    return data


def _json_diagram(payload: dict) -> InfluenceDiagram:
    try:
        chance_nodes = []
        for entry in payload["chance_nodes"]:
            scale = OutcomeScale(
                states=tuple(entry["states"]),
                numeric_values=entry.get("numeric_values"),
            )
            parents = tuple(entry.get("parents", ()))
            cpt = None
            if parents:
                cpt = CptTable(
                    child_states=scale.states,
                    parent_ids=parents,
                    columns=tuple(tuple(float(p) for p in col) for col in entry["cpt"]),
                )
            chance_nodes.append(ChanceNode(
                id=entry["id"],
                label=entry.get("label", entry["id"]),
                scale=scale,
                parents=parents,
                cpt=cpt,
                prior=entry.get("prior") if not parents else None,
            ))
        utility_nodes = tuple(
            UtilityNode(
                id=entry["id"],
                label=entry.get("label", entry["id"]),
                parents=tuple(entry["parents"]),
                utilities=tuple(float(u) for u in entry["utilities"]),
            )
            for entry in payload.get("utility_nodes", ())
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed diagram payload: {exc!r}") from exc
    return InfluenceDiagram(chance_nodes=tuple(chance_nodes), utility_nodes=utility_nodes)


def _rebuild_mast(extension: dict, stored: InfluenceDiagram) -> MastModel:
    try:
        factors = tuple(
            RiskFactor(
                id=entry["id"],
                label=entry.get("label", entry["id"]),
                impact=float(entry["impact"]),
                outcome_values=entry["outcome_values"],
                prior=entry["prior"],
            )
            for entry in extension["factors"]
        )
        base_cost = float(extension["base_cost"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model parameters: {exc}") from exc

    model = assemble_model(factors, base_cost)
    stored_training = stored.chance_node(model.training_node_id)
    regenerated = model.diagram.chance_node(model.training_node_id)
    if stored_training.cpt is None or stored_training.parents != regenerated.parents:
        raise ModelFormatError("stored training node does not match the factor parameters")
    for i, (stored_col, expected_col) in enumerate(
            zip(stored_training.cpt.columns, regenerated.cpt.columns)):
        if tuple(stored_col) != tuple(expected_col):
            raise ModelFormatError(
                f"stored CPT disagrees with the stored impacts at column {i}: "
                f"{tuple(stored_col)} != {tuple(expected_col)}")
    if len(stored_training.cpt.columns) != len(regenerated.cpt.columns):
        raise ModelFormatError("stored CPT has the wrong number of columns")
    return model


def load_document(source: bytes | str | Path) -> ModelDocument:
    """Parse and validate a native document from bytes or a file path."""
    data = _read_source(source)
    try:
        payload = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"document is not UTF-8: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise ModelFormatError("document root must be a JSON object")

    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unknown format version {version!r} (supported: {FORMAT_VERSION!r})")
    if "diagram" not in payload:
        raise ModelFormatError("document has no 'diagram' section")

    diagram = _json_diagram(payload["diagram"])
    _require_valid(diagram, "document failed validation")

    mast = None
    evidence = None
    if "mast" in payload:
        extension = payload["mast"]
        mast = _rebuild_mast(extension, diagram)
        if "evidence" in extension:
            evidence = dict(extension["evidence"])
            for node_id, state in evidence.items():
                node = diagram.chance_node(node_id)
                if state not in node.scale.states:
                    raise ModelFormatError(
                        f"evidence snapshot has unknown state {state!r} for {node_id!r}")
    return ModelDocument(
        format_version=version, diagram=diagram, mast=mast, evidence=evidence)


def load_model(source: bytes | str | Path) -> MastModel | InfluenceDiagram:
    """Load a native document; returns the model when parameters are present."""
    return load_document(source).model_or_diagram


def _read_source(source: bytes | str | Path) -> bytes:
    if isinstance(source, bytes):
        return source
    path = Path(source)
    try:
        return path.read_bytes()
    except OSError as exc:
        raise ModelFormatError(f"cannot read {path}: {exc.strerror}") from exc


# --- XDSL ----------------------------------------------------------------------

def _sanitize_id(raw: str, taken: set[str]) -> str:
    candidate = re.sub(r"[^A-Za-z0-9_]", "_", raw)
    if not candidate or not candidate[0].isalpha():
        candidate = "n_" + candidate
    base = candidate
    suffix = 2
    while candidate in taken:
        candidate = f"{base}_{suffix}"
        suffix += 1
    taken.add(candidate)
    return candidate


def _fmt(value: float) -> str:
    return repr(float(value))


def export_xdsl(
    diagram: InfluenceDiagram, destination: str | Path | None = None
) -> bytes:
    """Emit the diagram as XDSL bytes; deterministic for identical input."""
    violations = validate(diagram)
    if violations:
        raise ValueError(
            "refusing to export an invalid diagram: " + "; ".join(str(v) for v in violations))

    taken: set[str] = set()
    node_ids = {n.id: _sanitize_id(n.id, taken) for n in diagram.chance_nodes}
    node_ids.update({u.id: _sanitize_id(u.id, taken) for u in diagram.utility_nodes})
    state_ids: dict[str, dict[str, str]] = {}
    for node in diagram.chance_nodes:
        taken_states: set[str] = set()
        state_ids[node.id] = {s: _sanitize_id(s, taken_states) for s in node.scale.states}

    root = ET.Element("smile", {"version": "1.0", "id": "network"})
    nodes_el = ET.SubElement(root, "nodes")
    for node in diagram.chance_nodes:
        cpt_el = ET.SubElement(nodes_el, "cpt", {"id": node_ids[node.id]})
        for state in node.scale.states:
            ET.SubElement(cpt_el, "state", {"id": state_ids[node.id][state]})
        if node.parents:
            ET.SubElement(cpt_el, "parents").text = " ".join(node_ids[p] for p in node.parents)
            values = [p for column in node.cpt.columns for p in column]
        else:
            values = [node.prior[s] for s in node.scale.states]
        ET.SubElement(cpt_el, "probabilities").text = " ".join(_fmt(v) for v in values)
    for unode in diagram.utility_nodes:
        u_el = ET.SubElement(nodes_el, "utility", {"id": node_ids[unode.id]})
        if unode.parents:
            ET.SubElement(u_el, "parents").text = " ".join(node_ids[p] for p in unode.parents)
        ET.SubElement(u_el, "utilities").text = " ".join(_fmt(v) for v in unode.utilities)

    extensions = ET.SubElement(root, "extensions")
    genie = ET.SubElement(extensions, "genie", {"version": "1.0", "app": "mast", "name": "network"})
    for node in diagram.chance_nodes:
        attrs = {"id": node_ids[node.id]}
        if node_ids[node.id] != node.id:
            attrs["original"] = node.id
        g_node = ET.SubElement(genie, "node", attrs)
        ET.SubElement(g_node, "name").text = node.label
        for state in node.scale.states:
            s_attrs = {"id": state_ids[node.id][state]}
            if state_ids[node.id][state] != state:
                s_attrs["original"] = state
            if node.scale.numeric_values is not None:
                s_attrs["value"] = _fmt(node.scale.numeric_values[state])
            if len(s_attrs) > 1:
                ET.SubElement(g_node, "state", s_attrs)
    for unode in diagram.utility_nodes:
        attrs = {"id": node_ids[unode.id]}
        if node_ids[unode.id] != unode.id:
            attrs["original"] = unode.id
        g_node = ET.SubElement(genie, "node", attrs)
        ET.SubElement(g_node, "name").text = unode.label

    ET.indent(root)
    data = ET.tostring(root, encoding="UTF-8", xml_declaration=True) + b"\n"
    if destination is not None:
        Path(destination).write_bytes(data)
    return data


def import_xdsl(source: bytes | str | Path) -> InfluenceDiagram:
    """Parse XDSL bytes (or a file path) back into a validated diagram.

    Foreign elements and attributes (layout blocks, other vendors'
    extensions) are skipped with an :class:`XdslImportWarning` each.
    """
    data = _read_source(source)
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position
        raise ModelFormatError(f"malformed XML at line {line} column {column}: {exc.msg}") from exc
    if root.tag != "smile":
        raise ModelFormatError(f"expected a 'smile' root element, found {root.tag!r}")
    nodes_el = root.find("nodes")
    if nodes_el is None:
        raise ModelFormatError("document has no 'nodes' element")

    def warn(message: str) -> None:
        warnings.warn(message, XdslImportWarning, stacklevel=3)

    chance_raw: list[dict] = []
    utility_raw: list[dict] = []
    for element in nodes_el:
        if element.tag == "cpt":
            entry = {"id": element.get("id"), "states": [], "parents": [], "values": None}
            for child in element:
                if child.tag == "state":
                    entry["states"].append(child.get("id"))
                elif child.tag == "parents":
                    entry["parents"] = (child.text or "").split()
                elif child.tag == "probabilities":
                    entry["values"] = (child.text or "").split()
                else:
                    warn(f"ignored element '{child.tag}' inside cpt {entry['id']!r}")
            chance_raw.append(entry)
        elif element.tag == "utility":
            entry = {"id": element.get("id"), "parents": [], "values": None}
            for child in element:
                if child.tag == "parents":
                    entry["parents"] = (child.text or "").split()
                elif child.tag == "utilities":
                    entry["values"] = (child.text or "").split()
                else:
                    warn(f"ignored element '{child.tag}' inside utility {entry['id']!r}")
            utility_raw.append(entry)
        else:
            warn(f"ignored unsupported node element '{element.tag}'")

    labels: dict[str, str] = {}
    originals: dict[str, str] = {}
    state_originals: dict[str, dict[str, str]] = {}
    state_values: dict[str, dict[str, float]] = {}
    for element in root:
        if element.tag in ("nodes",):
            continue
        if element.tag != "extensions":
            warn(f"ignored root element '{element.tag}'")
            continue
        for ext in element:
            if ext.tag != "genie":
                warn(f"ignored extension element '{ext.tag}'")
                continue
            for g_node in ext:
                if g_node.tag != "node":
                    warn(f"ignored genie element '{g_node.tag}'")
                    continue
                nid = g_node.get("id")
                if nid is None:
                    continue
                if g_node.get("original"):
                    originals[nid] = g_node.get("original")
                for child in g_node:
                    if child.tag == "name":
                        labels[nid] = child.text or ""
                    elif child.tag == "state":
                        sid = child.get("id")
                        if sid is None:
                            continue
                        if child.get("original"):
                            state_originals.setdefault(nid, {})[sid] = child.get("original")
                        if child.get("value") is not None:
                            try:
                                state_values.setdefault(nid, {})[sid] = float(child.get("value"))
                            except ValueError:
                                warn(f"ignored non-numeric state value on {nid!r}")
                    else:
                        warn(f"ignored genie node element '{child.tag}'")

    def restore_node_id(san: str) -> str:
        return originals.get(san, san)

    state_counts = {e["id"]: len(e["states"]) for e in chance_raw}

    def parse_floats(entry: dict, what: str) -> list[float]:
        if entry["values"] is None:
            raise ModelFormatError(f"node {entry['id']!r} has no {what} element")
        try:
            return [float(v) for v in entry["values"]]
        except ValueError as exc:
            raise ModelFormatError(f"non-numeric {what} for node {entry['id']!r}: {exc}") from exc

    chance_nodes = []
    for entry in chance_raw:
        nid = entry["id"]
        if not nid:
            raise ModelFormatError("cpt element without an id")
        values = parse_floats(entry, "probabilities")
        if any(s is None for s in entry["states"]):
            raise ModelFormatError(f"node {nid!r} has a state element without an id")
        n_states = len(entry["states"])
        if n_states < 1:
            raise ModelFormatError(f"node {nid!r} declares no states")
        expected = n_states
        for p in entry["parents"]:
            if p not in state_counts:
                raise ModelFormatError(f"node {nid!r} references unknown parent {p!r}")
            expected *= state_counts[p]
        if len(values) != expected:
            raise ModelFormatError(
                f"node {nid!r} has {len(values)} probabilities, expected {expected}")

        restored_states = tuple(
            state_originals.get(nid, {}).get(s, s) for s in entry["states"])
        numeric = None
        if nid in state_values:
            numeric = {
                state_originals.get(nid, {}).get(s, s): v
                for s, v in state_values[nid].items()
            }
        scale = OutcomeScale(states=restored_states, numeric_values=numeric)
        parents = tuple(restore_node_id(p) for p in entry["parents"])
        if parents:
            columns = tuple(
                tuple(values[i * n_states:(i + 1) * n_states])
                for i in range(len(values) // n_states)
            )
            node = ChanceNode(
                id=restore_node_id(nid),
                label=labels.get(nid, restore_node_id(nid)),
                scale=scale,
                parents=parents,
                cpt=CptTable(child_states=restored_states, parent_ids=parents, columns=columns),
            )
        else:
            node = ChanceNode(
                id=restore_node_id(nid),
                label=labels.get(nid, restore_node_id(nid)),
                scale=scale,
                prior=dict(zip(restored_states, values)),
            )
        chance_nodes.append(node)

    utility_nodes = []
    for entry in utility_raw:
        nid = entry["id"]
        if not nid:
            raise ModelFormatError("utility element without an id")
        values = parse_floats(entry, "utilities")
        expected = 1
        for p in entry["parents"]:
            if p not in state_counts:
                raise ModelFormatError(f"node {nid!r} references unknown parent {p!r}")
            expected *= state_counts[p]
        if len(values) != expected:
            raise ModelFormatError(
                f"node {nid!r} has {len(values)} utilities, expected {expected}")
        utility_nodes.append(UtilityNode(
            id=restore_node_id(nid),
            label=labels.get(nid, restore_node_id(nid)),
            parents=tuple(restore_node_id(p) for p in entry["parents"]),
            utilities=tuple(values),
        ))

    diagram = InfluenceDiagram(
        chance_nodes=tuple(chance_nodes), utility_nodes=tuple(utility_nodes))
    _require_valid(diagram, "imported diagram failed validation")
    return diagram
