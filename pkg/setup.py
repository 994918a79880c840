from setuptools import setup, find_packages

setup(
    name="roomsim",
    version="0.1",
    packages=find_packages(exclude=["examples", "examples.*"]),
    install_requires=[
        "fastapi",
        "uvicorn",
        "python-dotenv",
        "pydantic>=2",
        "pydantic-settings",
        "aiofiles",
        "numpy",
        "scipy",
    ],
    extras_require={
        "test": ["pytest", "pytest-asyncio", "httpx"],
    },
    entry_points={
        "console_scripts": [
            "roomsim=app.cli:main",
        ],
    },
)
