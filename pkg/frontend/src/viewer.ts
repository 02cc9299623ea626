/**
 * WebGL scene: decomposition parts, region box outlines, and the error
 * heatmap point cloud.  All geometry arrives parsed from server responses;
 * this module only displays it.
 */

import * as THREE from "three";

import type { HeatmapAttributes } from "./heatmap.js";
import type { ParsedMesh } from "./obj.js";
import type { UiRegion } from "./regions.js";

const PART_COLORS = [
  0x7fc97f, 0xbeaed4, 0xfdc086, 0x80b1d3, 0xfb8072,
  0xffffb3, 0xb3de69, 0xfccde5, 0xbc80bd, 0x8dd3c7,
];

export class Viewer {
  private readonly renderer: THREE.WebGLRenderer;
  private readonly scene = new THREE.Scene();
  private readonly camera: THREE.PerspectiveCamera;
  private readonly partGroup = new THREE.Group();
  private readonly regionGroup = new THREE.Group();
  private heatmap: THREE.Points | null = null;
  private readonly partMeshes = new Map<string, THREE.Mesh>();
  // simple orbit state: spherical angles around the scene origin
  private theta = Math.PI / 4;
  private phi = Math.PI / 3;
  private distance = 5;

  constructor(private readonly canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setClearColor(0x1c1f26);
    this.camera = new THREE.PerspectiveCamera(
      50, canvas.clientWidth / Math.max(1, canvas.clientHeight), 0.01, 100);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.45));
    const sun = new THREE.DirectionalLight(0xffffff, 1.1);
    sun.position.set(3, 5, 4);
    this.scene.add(sun);
    this.scene.add(this.partGroup, this.regionGroup);
    this.bindOrbit();
    this.updateCamera();
    this.renderLoop();
  }

  private bindOrbit(): void {
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    this.canvas.addEventListener("pointerdown", (e) => {
      dragging = true;
      lastX = e.clientX;
      lastY = e.clientY;
    });
    window.addEventListener("pointerup", () => { dragging = false; });
    window.addEventListener("pointermove", (e) => {
      if (!dragging) {
        return;
      }
      this.theta -= (e.clientX - lastX) * 0.008;
      this.phi = Math.min(
        Math.PI - 0.05,
        Math.max(0.05, this.phi - (e.clientY - lastY) * 0.008));
      lastX = e.clientX;
      lastY = e.clientY;
      this.updateCamera();
    });
    this.canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.distance = Math.min(
        50, Math.max(0.2, this.distance * Math.exp(e.deltaY * 0.001)));
      this.updateCamera();
    }, { passive: false });
  }

  private updateCamera(): void {
    this.camera.position.set(
      this.distance * Math.sin(this.phi) * Math.cos(this.theta),
      this.distance * Math.sin(this.phi) * Math.sin(this.theta),
      this.distance * Math.cos(this.phi),
    );
    this.camera.up.set(0, 0, 1);
    this.camera.lookAt(0, 0, 0);
  }

  private renderLoop(): void {
    const draw = () => {
      const w = this.canvas.clientWidth;
      const h = Math.max(1, this.canvas.clientHeight);
      if (this.canvas.width !== w || this.canvas.height !== h) {
        this.renderer.setSize(w, h, false);
        this.camera.aspect = w / h;
        this.camera.updateProjectionMatrix();
      }
      this.renderer.render(this.scene, this.camera);
      requestAnimationFrame(draw);
    };
    requestAnimationFrame(draw);
  }

  clearParts(): void {
    this.partGroup.clear();
    this.partMeshes.clear();
  }

  addPart(name: string, parsed: ParsedMesh, index: number): void {
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute(
      "position", new THREE.BufferAttribute(parsed.positions, 3));
    geometry.setIndex(new THREE.BufferAttribute(parsed.indices, 1));
    geometry.computeVertexNormals();
    const material = new THREE.MeshStandardMaterial({
      color: PART_COLORS[index % PART_COLORS.length],
      flatShading: true,
      transparent: true,
      opacity: 0.95,
    });
    const mesh = new THREE.Mesh(geometry, material);
    mesh.name = name;
    this.partGroup.add(mesh);
    this.partMeshes.set(name, mesh);
  }

  /** Hiding a part is purely a view-state change. */
  setPartVisible(name: string, visible: boolean): void {
    const mesh = this.partMeshes.get(name);
    if (mesh) {
      mesh.visible = visible;
    }
  }

  setRegions(regions: UiRegion[]): void {
    this.regionGroup.clear();
    for (const region of regions) {
      const size = [0, 1, 2].map((a) => region.max[a] - region.min[a]);
      const box = new THREE.BoxGeometry(size[0], size[1], size[2]);
      const edges = new THREE.EdgesGeometry(box);
      const lines = new THREE.LineSegments(
        edges, new THREE.LineBasicMaterial({ color: region.color }));
      lines.position.set(
        (region.min[0] + region.max[0]) / 2,
        (region.min[1] + region.max[1]) / 2,
        (region.min[2] + region.max[2]) / 2,
      );
      this.regionGroup.add(lines);
    }
  }

  /** Replace the heatmap cloud with server-colored sample points. */
  setHeatmap(attributes: HeatmapAttributes | null): void {
    if (this.heatmap) {
      this.scene.remove(this.heatmap);
      this.heatmap = null;
    }
    if (attributes === null) {
      return;
    }
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute(
      "position", new THREE.BufferAttribute(attributes.positions, 3));
    geometry.setAttribute(
      "color", new THREE.BufferAttribute(attributes.colors, 3));
    const material = new THREE.PointsMaterial(
      { size: 0.015, vertexColors: true });
    this.heatmap = new THREE.Points(geometry, material);
    this.scene.add(this.heatmap);
  }

  frame(aabbMin: number[], aabbMax: number[]): void {
    const diagonal = Math.hypot(
      aabbMax[0] - aabbMin[0],
      aabbMax[1] - aabbMin[1],
      aabbMax[2] - aabbMin[2],
    );
    this.distance = Math.max(0.5, diagonal * 1.6);
    this.updateCamera();
  }
}
