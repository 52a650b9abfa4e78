import pytest

from optica import bundled, check_query, load_schema, load_value, parse_query


@pytest.fixture(scope="session")
def couples_schema():
    return load_schema(bundled("couples.schema"))


@pytest.fixture(scope="session")
def org_schema():
    return load_schema(bundled("org.schema"))


@pytest.fixture(scope="session")
def couples_data(couples_schema):
    return load_value(bundled("couples.xml"), couples_schema)


@pytest.fixture(scope="session")
def org_data(org_schema):
    return load_value(bundled("org.xml"), org_schema)


@pytest.fixture(scope="session")
def differences(couples_schema):
    return check_query(parse_query(bundled("differences.query")), couples_schema)


@pytest.fixture(scope="session")
def expertise(org_schema):
    return check_query(parse_query(bundled("expertise.query")), org_schema)
