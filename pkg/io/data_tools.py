""" This module contains functions for loading and writing documents. """
import json
import os

import networkx as nx

from SurfaceScope.models.mesh import FORMAT as MESH_FORMAT
from SurfaceScope.models.mesh import SurfaceMesh
from SurfaceScope.models.model_surface import parse_spec
from SurfaceScope.models.moves import MoveLog
from SurfaceScope.utils.errors import MeshFormatError, MoveError, SpecError


def read_json(file_path, error=MeshFormatError):
    """Load a JSON document, reporting bad text as ``error``."""
    with open(file_path, "r", encoding="utf-8") as file:
        try:
            return json.load(file)
        except json.JSONDecodeError as decode_error:
            raise error(f"{file_path} is not valid JSON: {decode_error}") from decode_error


def dumps(document):
    """Canonical text: sorted keys, four-space indent."""
    return json.dumps(document, indent=4, sort_keys=True)


def write_json(file_path, document):
    """Write a document in canonical form."""
    folder = os.path.dirname(file_path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(file_path, "w", encoding="utf-8") as file:
        file.write(dumps(document))
        file.write("\n")


def read_mesh(file_path):
    """Load an ``srs-mesh/1`` file."""
    return SurfaceMesh.from_dict(read_json(file_path))


def write_mesh(file_path, mesh):
    """Write a mesh with its holes named canonically."""
    write_json(file_path, mesh.canonical().to_dict())


def graph_from_dict(document):
    """Abstract graph from a mesh document or ``{"vertices", "edges"}``."""
    if not isinstance(document, dict):
        raise MeshFormatError("a graph document must be a JSON object")
    if document.get("format") == MESH_FORMAT:
        return SurfaceMesh.from_dict(document).graph()
    try:
        graph = nx.Graph()
        graph.add_nodes_from(int(vertex) for vertex in document["vertices"])
        for u, v in document["edges"]:
            if int(u) not in graph or int(v) not in graph:
                raise MeshFormatError(f"edge {u}-{v} names a missing vertex")
            graph.add_edge(int(u), int(v))
    except (KeyError, TypeError, ValueError) as error:
        if isinstance(error, MeshFormatError):
            raise
        raise MeshFormatError(f"malformed graph document: {error}") from error
    return graph


def graph_to_dict(graph):
    """Plain ``{"vertices", "edges"}`` document for a graph."""
    return {
        "vertices": sorted(graph.nodes),
        "edges": sorted([min(u, v), max(u, v)] for u, v in graph.edges),
    }


def read_graph(file_path):
    """Load an abstract graph from a mesh or graph file."""
    return graph_from_dict(read_json(file_path))


def read_spec(file_path):
    """Load and validate a ``tree-spec/1`` file."""
    return parse_spec(read_json(file_path, error=SpecError))


def read_moves(file_path):
    """Load a ``moves/1`` log."""
    return MoveLog.from_dict(read_json(file_path, error=MoveError))


def write_moves(file_path, log):
    """Write a move log."""
    write_json(file_path, log.to_dict())


def write_tower(folder, tower):
    """One mesh file per stage plus the move log."""
    os.makedirs(folder, exist_ok=True)
    paths = []
    for index, stage in enumerate(tower.stages):
        path = os.path.join(folder, f"stage_{index:03d}.json")
        write_mesh(path, stage)
        paths.append(path)
    write_moves(os.path.join(folder, "moves.json"), tower.log)
    return paths


def to_dot(mesh_or_graph):
    """Graphviz text; hole edges of a mesh are drawn dashed."""
    if isinstance(mesh_or_graph, SurfaceMesh):
        graph = mesh_or_graph.graph()
        on_hole = {
            edge_id for hole in mesh_or_graph.hole_faces for edge_id in hole.edge_ids
        }
    else:
        graph = mesh_or_graph
        on_hole = set()
    lines = ["graph G {"]
    lines.extend(f"    {vertex};" for vertex in sorted(graph.nodes))
    for u, v, data in sorted(graph.edges(data=True), key=lambda item: (min(item[:2]), max(item[:2]))):
        attributes = []
        if data.get("sign", 1) < 0:
            attributes.append('label="-"')
        if data.get("id") in on_hole:
            attributes.append("style=dashed")
        suffix = f" [{', '.join(attributes)}]" if attributes else ""
        lines.append(f"    {min(u, v)} -- {max(u, v)}{suffix};")
    lines.append("}")
    return "\n".join(lines) + "\n"
