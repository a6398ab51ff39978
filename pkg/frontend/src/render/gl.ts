// Minimal WebGL mesh renderer: per-vertex colors, Lambert shading, and a
// switchable normal source so the deformed surface can be lit with the
// original mesh's normals for shape comparison.

const VS = `
attribute vec3 aPosition;
attribute vec3 aNormal;
attribute vec3 aColor;

uniform mat4 uMvp;

varying vec3 vColor;
varying vec3 vNormal;

void main() {
  vColor = aColor;
  vNormal = aNormal;
  gl_Position = uMvp * vec4(aPosition, 1.0);
}
`;

const FS = `
precision mediump float;
varying vec3 vColor;
varying vec3 vNormal;

void main() {
  vec3 lightDir = normalize(vec3(0.35, 0.25, 0.9));
  float lambert = abs(dot(normalize(vNormal), lightDir));
  vec3 shaded = vColor * (0.25 + 0.75 * lambert);
  gl_FragColor = vec4(shaded, 1.0);
}
`;

export function computeVertexNormals(
  positions: ArrayLike<number>,
  faces: ArrayLike<number>,
): Float32Array {
  const n = Math.floor(positions.length / 3);
  const normals = new Float32Array(n * 3);
  for (let f = 0; f < faces.length; f += 3) {
    const a = faces[f] * 3;
    const b = faces[f + 1] * 3;
    const c = faces[f + 2] * 3;
    const ux = positions[b] - positions[a];
    const uy = positions[b + 1] - positions[a + 1];
    const uz = positions[b + 2] - positions[a + 2];
    const vx = positions[c] - positions[a];
    const vy = positions[c + 1] - positions[a + 1];
    const vz = positions[c + 2] - positions[a + 2];
    // cross product is twice the area-weighted face normal
    const nx = uy * vz - uz * vy;
    const ny = uz * vx - ux * vz;
    const nz = ux * vy - uy * vx;
    for (const idx of [a, b, c]) {
      normals[idx] += nx;
      normals[idx + 1] += ny;
      normals[idx + 2] += nz;
    }
  }
  for (let i = 0; i < n; i++) {
    const len = Math.hypot(normals[i * 3], normals[i * 3 + 1], normals[i * 3 + 2]) || 1;
    normals[i * 3] /= len;
    normals[i * 3 + 1] /= len;
    normals[i * 3 + 2] /= len;
  }
  return normals;
}

function compile(gl: WebGLRenderingContext, type: number, src: string): WebGLShader {
  const shader = gl.createShader(type)!;
  gl.shaderSource(shader, src);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    throw new Error(gl.getShaderInfoLog(shader) ?? "shader compile failed");
  }
  return shader;
}

export class MeshRenderer {
  private program: WebGLProgram;
  private buffers: Record<"position" | "normal" | "color" | "index", WebGLBuffer>;
  private indexCount = 0;
  private locations: { position: number; normal: number; color: number; mvp: WebGLUniformLocation };

  constructor(private gl: WebGLRenderingContext) {
    const program = gl.createProgram()!;
    gl.attachShader(program, compile(gl, gl.VERTEX_SHADER, VS));
    gl.attachShader(program, compile(gl, gl.FRAGMENT_SHADER, FS));
    gl.linkProgram(program);
    if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
      throw new Error(gl.getProgramInfoLog(program) ?? "program link failed");
    }
    this.program = program;
    this.buffers = {
      position: gl.createBuffer()!,
      normal: gl.createBuffer()!,
      color: gl.createBuffer()!,
      index: gl.createBuffer()!,
    };
    this.locations = {
      position: gl.getAttribLocation(program, "aPosition"),
      normal: gl.getAttribLocation(program, "aNormal"),
      color: gl.getAttribLocation(program, "aColor"),
      mvp: gl.getUniformLocation(program, "uMvp")!,
    };
    gl.enable(gl.DEPTH_TEST);
  }

  setMesh(positions: Float32Array, faces: Uint32Array | Uint16Array, normals: Float32Array): void {
    const gl = this.gl;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.buffers.position);
    gl.bufferData(gl.ARRAY_BUFFER, positions, gl.DYNAMIC_DRAW);
    gl.bindBuffer(gl.ARRAY_BUFFER, this.buffers.normal);
    gl.bufferData(gl.ARRAY_BUFFER, normals, gl.DYNAMIC_DRAW);
    gl.bindBuffer(gl.ELEMENT_ARRAY_BUFFER, this.buffers.index);
    const indices = new Uint32Array(faces.length);
    indices.set(faces);
    gl.getExtension("OES_element_index_uint");
    gl.bufferData(gl.ELEMENT_ARRAY_BUFFER, indices, gl.STATIC_DRAW);
    this.indexCount = faces.length;
  }

  setColors(colors: Float32Array): void {
    const gl = this.gl;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.buffers.color);
    gl.bufferData(gl.ARRAY_BUFFER, colors, gl.DYNAMIC_DRAW);
  }

  draw(mvp: Float64Array, viewport: { x: number; y: number; w: number; h: number }): void {
    const gl = this.gl;
    gl.viewport(viewport.x, viewport.y, viewport.w, viewport.h);
    gl.useProgram(this.program);
    for (const [name, buffer] of [
      ["position", this.buffers.position],
      ["normal", this.buffers.normal],
      ["color", this.buffers.color],
    ] as const) {
      const loc = this.locations[name];
      gl.bindBuffer(gl.ARRAY_BUFFER, buffer);
      gl.enableVertexAttribArray(loc);
      gl.vertexAttribPointer(loc, 3, gl.FLOAT, false, 0, 0);
    }
    gl.uniformMatrix4fv(this.locations.mvp, false, new Float32Array(mvp));
    gl.bindBuffer(gl.ELEMENT_ARRAY_BUFFER, this.buffers.index);
    gl.drawElements(gl.TRIANGLES, this.indexCount, gl.UNSIGNED_INT, 0);
  }

  clear(): void {
    const gl = this.gl;
    gl.clearColor(0.12, 0.12, 0.14, 1.0);
    gl.clear(gl.COLOR_BUFFER_BIT | gl.DEPTH_BUFFER_BIT);
  }
}
