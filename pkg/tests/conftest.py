import json
from pathlib import Path

import pytest
from hypothesis import settings

from errlens.catalog import Catalog, load_catalog_file
from errlens.cli import shipped_catalog_path
from errlens.facts import extract_facts
from errlens.minilang import parse_program
from errlens.taskspec import load_taskspec_file

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def shipped_catalog() -> Catalog:
    return load_catalog_file(shipped_catalog_path())


@pytest.fixture(scope="session")
def catalog_text() -> str:
    return shipped_catalog_path().read_text()


@pytest.fixture()
def jiong_program():
    src = (FIXTURES / "jiong.mini").read_text()
    return parse_program(src, str(FIXTURES / "jiong.mini"))


@pytest.fixture()
def jiong_task():
    return load_taskspec_file(FIXTURES / "jiong.task.json")


@pytest.fixture()
def ask_task():
    return load_taskspec_file(FIXTURES / "jiong_ask.task.json")


@pytest.fixture()
def jiong_facts(jiong_program, jiong_task):
    return extract_facts(jiong_program, jiong_task)


def load_fixture_facts(program_name: str, task_name: str):
    src = (FIXTURES / program_name).read_text()
    program = parse_program(src, str(FIXTURES / program_name))
    task = load_taskspec_file(FIXTURES / task_name)
    return program, task, extract_facts(program, task)


@pytest.fixture()
def answers_file(tmp_path) -> Path:
    path = tmp_path / "answers.json"
    path.write_text(json.dumps({"answers": [
        {"question_id": "post_completion:needed:figure_separator",
         "answer": "no"},
    ]}))
    return path
